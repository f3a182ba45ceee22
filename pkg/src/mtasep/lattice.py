"""Domain types and deterministic per-configuration observables.

A configuration assigns to every lattice site a particle type (an integer;
larger means higher priority) or a hole.  Only a finite window of sites is
stored; with the ``RAINBOW_STEP`` boundary mode all queries treat the
outside of the window as the deterministic continuation ``type(x) = -x``,
so observables are computed exactly as on the infinite lattice without
materializing cells.  With ``FROZEN`` the window is the whole lattice.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import EmptyLevel, NotInvertible

#: Hole sentinel: lower than every particle type, so a hole never initiates
#: a swap and every particle swaps past it.
HOLE: int = -(2**63)


class BoundaryMode(enum.Enum):
    RAINBOW_STEP = "rainbow_step"
    FROZEN = "frozen"


@dataclass(frozen=True)
class Configuration:
    """Finite-window snapshot of a particle-type assignment on the line."""

    window_lo: int
    window_hi: int
    cells: tuple
    boundary: BoundaryMode = BoundaryMode.RAINBOW_STEP

    def __post_init__(self):
        if self.window_lo > self.window_hi:
            raise ValueError("window_lo must be <= window_hi")
        width = self.window_hi - self.window_lo + 1
        if len(self.cells) != width:
            raise ValueError(f"expected {width} cells, got {len(self.cells)}")
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.boundary is BoundaryMode.RAINBOW_STEP:
            expected = set(range(-self.window_hi, -self.window_lo + 1))
            if set(self.cells) != expected:
                raise ValueError(
                    "rainbow-step window must hold exactly the types "
                    f"{{{-self.window_hi}..{-self.window_lo}}}")

    @classmethod
    def step(cls, window_lo: int, window_hi: int,
             boundary: BoundaryMode = BoundaryMode.RAINBOW_STEP) -> "Configuration":
        """The step initial condition type(x) = -x on the window."""
        cells = tuple(-x for x in range(window_lo, window_hi + 1))
        return cls(window_lo, window_hi, cells, boundary)

    @classmethod
    def from_types(cls, window_lo: int, types,
                   boundary: BoundaryMode = BoundaryMode.RAINBOW_STEP) -> "Configuration":
        types = tuple(types)
        return cls(window_lo, window_lo + len(types) - 1, types, boundary)

    def in_window(self, x: int) -> bool:
        return self.window_lo <= x <= self.window_hi

    def type_at(self, x: int) -> int:
        """Type at site x, using the boundary continuation outside."""
        if self.in_window(x):
            return self.cells[x - self.window_lo]
        if self.boundary is BoundaryMode.RAINBOW_STEP:
            return -x
        raise IndexError(f"site {x} outside frozen window")

    @property
    def is_rainbow(self) -> bool:
        vals = [c for c in self.cells if c != HOLE]
        return len(vals) == len(self.cells) and len(set(vals)) == len(vals)

    def inverse(self) -> "Configuration":
        """Position-of-type map, itself a rainbow-step configuration.

        The inverse of a rainbow window state maps type c to its position;
        outside the inverted window the continuation is again c -> -c.
        """
        if self.boundary is not BoundaryMode.RAINBOW_STEP or not self.is_rainbow:
            raise NotInvertible("inverse requires a rainbow-step configuration")
        pos_of = {t: x for x, t in zip(range(self.window_lo, self.window_hi + 1),
                                       self.cells)}
        lo, hi = -self.window_hi, -self.window_lo
        cells = tuple(pos_of[c] for c in range(lo, hi + 1))
        return Configuration(lo, hi, cells, BoundaryMode.RAINBOW_STEP)

    def to_json(self) -> str:
        cells = [None if c == HOLE else c for c in self.cells]
        return json.dumps({"window": [self.window_lo, self.window_hi],
                           "cells": cells,
                           "boundary": self.boundary.value})

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        obj = json.loads(text)
        cells = tuple(HOLE if c is None else int(c) for c in obj["cells"])
        return cls(obj["window"][0], obj["window"][1], cells,
                   BoundaryMode(obj["boundary"]))


@dataclass(frozen=True)
class ColorCutoffs:
    """Strictly increasing tuple of color cutoffs c_1 < ... < c_n."""

    cutoffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        if len(self.cutoffs) < 1:
            raise ValueError("need at least one cutoff")
        if any(a >= b for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError("cutoffs must be strictly increasing")

    def __len__(self):
        return len(self.cutoffs)


@dataclass(frozen=True)
class LeaderRecord:
    """Vector of recorded maxima (k_1, ..., k_n); coordinates distinct."""

    positions: tuple

    def __post_init__(self):
        object.__setattr__(self, "positions",
                           tuple(int(k) for k in self.positions))
        if len(set(self.positions)) != len(self.positions):
            raise ValueError("recorded maxima must be pairwise distinct")

    def __len__(self):
        return len(self.positions)


@dataclass(frozen=True)
class ColoredComposition:
    """Parts with attached colors; parts pairwise distinct."""

    parts: tuple
    colors: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(p) for p in self.parts))
        object.__setattr__(self, "colors", tuple(int(b) for b in self.colors))
        if len(self.parts) != len(self.colors):
            raise ValueError("parts and colors must have equal length")
        if len(set(self.parts)) != len(self.parts):
            raise ValueError("parts must be pairwise distinct")

    def __len__(self):
        return len(self.parts)


@dataclass(frozen=True)
class HeightTriple:
    h_eq: int
    h_gt: int
    h_geq: int = field(default=None)

    def __post_init__(self):
        if self.h_geq is None:
            object.__setattr__(self, "h_geq", self.h_eq + self.h_gt)
        elif self.h_geq != self.h_eq + self.h_gt:
            raise ValueError("h_geq must equal h_eq + h_gt")


def _positions_ge_desc(config: Configuration, c: int) -> Iterator[int]:
    """Positions of types >= c, in descending order (may be infinite)."""
    hi, lo = config.window_hi, config.window_lo
    rainbow = config.boundary is BoundaryMode.RAINBOW_STEP
    if rainbow and -c > hi:
        # outside-right run: sites hi+1..-c hold types -x >= c
        for x in range(-c, hi, -1):
            yield x
    for x in range(hi, lo - 1, -1):
        t = config.cells[x - lo]
        if t != HOLE and t >= c:
            yield x
    if rainbow:
        x = min(lo - 1, -c)
        while True:  # types -x >= -lo + 1 >= c eventually; all of x <= -c qualify
            yield x
            x -= 1


def compute_M_C(config: Configuration, cutoffs: ColorCutoffs) -> LeaderRecord:
    """Recorded maxima of positions of types >= c_i, highest cutoff first.

    k_n is the rightmost position among types >= c_n; descending through
    the cutoffs, each k_i is the rightmost position among types >= c_i
    after discarding the already-recorded k_{i+1}, ..., k_n.
    """
    n = len(cutoffs)
    ks: list = [None] * n
    recorded: set = set()
    for i in range(n - 1, -1, -1):
        c = cutoffs.cutoffs[i]
        found = None
        for x in _positions_ge_desc(config, c):
            if x not in recorded:
                found = x
                break
        if found is None:
            raise EmptyLevel(f"no unrecorded position with type >= {c}")
        ks[i] = found
        recorded.add(found)
    return LeaderRecord(tuple(ks))


def leader(config: Configuration, k: int, s: int = 1) -> tuple:
    """Position and type of the (k, s)-leader.

    The (k, s)-leader occupies the s-th largest position among all sites
    holding a type >= k; s = 1 is the k-leader.
    """
    if s < 1:
        raise ValueError("rank s must be >= 1")
    seen = 0
    for x in _positions_ge_desc(config, k):
        seen += 1
        if seen == s:
            return x, config.type_at(x)
    raise EmptyLevel(f"fewer than {s} positions with type >= {k}")


def height(config: Configuration, c: int, k: int) -> HeightTriple:
    """Counts of sites l >= k holding type == c / > c / >= c."""
    lo, hi = config.window_lo, config.window_hi
    h_eq = 0
    h_gt = 0
    for x in range(max(k, lo), hi + 1):
        t = config.cells[x - lo]
        if t == HOLE:
            continue
        if t == c:
            h_eq += 1
        elif t > c:
            h_gt += 1
    if config.boundary is BoundaryMode.RAINBOW_STEP:
        # site -c holds type c on the continuation
        if not config.in_window(-c) and -c >= k:
            h_eq += 1
        # outside-right: hi < l <= -c - 1 hold types -l > c
        h_gt += max(0, (-c - 1) - max(hi + 1, k) + 1)
        # outside-left: k <= l < min(lo, -c) hold types -l > c
        if k < lo:
            h_gt += max(0, min(lo, -c) - k)
    return HeightTriple(h_eq, h_gt)


def observable_O(config: Configuration, kappa: ColoredComposition) -> int:
    """Indicator-product observable attached to a colored composition.

    Product over the parts of 1{particle of color b_i sits at position
    >= part_i + 1} times 1{the inverse-state height count of positions
    above part_i at colors > b_i matches the composition's own count}.
    """
    xi = config.inverse()  # raises NotInvertible when not rainbow
    for p, b in zip(kappa.parts, kappa.colors):
        if xi.type_at(b) < p + 1:
            return 0
        h_tilde = height(xi, p, b + 1).h_gt
        h_kappa = sum(1 for pj, bj in zip(kappa.parts, kappa.colors)
                      if pj >= p + 1 and bj > b)
        if h_tilde != h_kappa:
            return 0
    return 1


def project_voter(config: Configuration) -> np.ndarray:
    """Running minimum of types left-to-right over the window."""
    _require_rainbow_step(config)
    return np.minimum.accumulate(np.asarray(config.cells, dtype=np.int64))


def project_coalescence(config: Configuration) -> np.ndarray:
    """1 at sites whose type is below everything strictly to the left."""
    _require_rainbow_step(config)
    cells = np.asarray(config.cells, dtype=np.int64)
    out = np.zeros(len(cells), dtype=np.int64)
    out[0] = 1  # outside-left types all exceed every in-window type
    out[1:] = cells[1:] < np.minimum.accumulate(cells)[:-1]
    return out


def project_ranking(config: Configuration) -> np.ndarray:
    """Rank of each site: count of weakly lower types weakly to its left."""
    _require_rainbow_step(config)
    cells = np.asarray(config.cells, dtype=np.int64)
    # outside-left types all exceed in-window types, so they contribute 0
    leq = cells[None, :] <= cells[:, None]
    mask = np.tril(np.ones((len(cells), len(cells)), dtype=bool))
    return (leq & mask).sum(axis=1)


def _require_rainbow_step(config: Configuration) -> None:
    if config.boundary is not BoundaryMode.RAINBOW_STEP:
        raise NotInvertible("projection requires the rainbow-step boundary")


def random_reachable_configuration(window_lo: int, window_hi: int,
                                   n_swaps: int, rng) -> Configuration:
    """Random state reachable from the step state by window-local swaps.

    Applies n_swaps admissible adjacent swaps chosen uniformly; rng is a
    StreamRNG.  Used to generate test fixtures.
    """
    types = [-x for x in range(window_lo, window_hi + 1)]
    width = len(types)
    for _ in range(n_swaps):
        admissible = [i for i in range(width - 1) if types[i] > types[i + 1]]
        if not admissible:
            break
        i = admissible[rng.randint(len(admissible))]
        types[i], types[i + 1] = types[i + 1], types[i]
    return Configuration.from_types(window_lo, types)
