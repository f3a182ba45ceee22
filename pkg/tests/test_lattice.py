import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtasep.errors import EmptyLevel, NotInvertible
from mtasep.lattice import (
    HOLE,
    BoundaryMode,
    ColorCutoffs,
    ColoredComposition,
    Configuration,
    HeightTriple,
    LeaderRecord,
    compute_M_C,
    height,
    leader,
    observable_O,
    project_coalescence,
    project_ranking,
    project_voter,
    random_reachable_configuration,
)
from mtasep.rng import StreamRNG


# Worked example used throughout: a state reachable from the step state.
EXAMPLE = Configuration.from_types(-4, (0, 4, -1, 3, -2, 1, 2))


def test_step_types():
    c = Configuration.step(-3, 5)
    assert [c.type_at(x) for x in range(-3, 6)] == [3, 2, 1, 0, -1, -2, -3, -4, -5]
    # continuation outside the window
    assert c.type_at(-10) == 10
    assert c.type_at(10) == -10


def test_window_validation():
    with pytest.raises(ValueError):
        Configuration(2, 1, ())
    with pytest.raises(ValueError):
        Configuration(0, 2, (0, -1))
    with pytest.raises(ValueError):
        # rainbow window must hold exactly the step types
        Configuration(0, 2, (0, 0, -2))


def test_frozen_no_continuation():
    c = Configuration(0, 2, (5, HOLE, -1), boundary=BoundaryMode.FROZEN)
    assert c.type_at(1) == HOLE
    with pytest.raises(IndexError):
        c.type_at(3)


def test_json_round_trip():
    c = EXAMPLE
    c2 = Configuration.from_json(c.to_json())
    assert c2 == c
    f = Configuration(0, 2, (5, HOLE, -1), boundary=BoundaryMode.FROZEN)
    obj = json.loads(f.to_json())
    assert obj["cells"] == [5, None, -1]
    assert Configuration.from_json(f.to_json()) == f


def test_cutoffs_validation():
    assert len(ColorCutoffs((0, 1, 3))) == 3
    with pytest.raises(ValueError):
        ColorCutoffs((1, 1))
    with pytest.raises(ValueError):
        ColorCutoffs(())
    with pytest.raises(ValueError):
        LeaderRecord((2, 2))
    with pytest.raises(ValueError):
        ColoredComposition((1, 1), (0, 2))
    with pytest.raises(ValueError):
        HeightTriple(1, 2, 4)
    assert HeightTriple(1, 2).h_geq == 3


def test_M_C_on_step():
    c = Configuration.step(-5, 5)
    for cutoffs in [(0,), (0, 1), (-2, 0, 3), (1, 2, 3, 4)]:
        rec = compute_M_C(c, ColorCutoffs(cutoffs))
        assert rec.positions == tuple(-ci for ci in cutoffs)


def test_M_C_example():
    assert compute_M_C(EXAMPLE, ColorCutoffs((0,))).positions == (2,)
    # level 3 records -1 first, then level 0 records the rightmost left over
    assert compute_M_C(EXAMPLE, ColorCutoffs((0, 3))).positions == (2, -1)
    # level 1 records 2 before level 0 gets to pick, leaving 1 for level 0
    assert compute_M_C(EXAMPLE, ColorCutoffs((0, 1, 3))).positions == (1, 2, -1)


def test_M_C_uses_continuation():
    # tiny window; cutoff below the window forces the outside-right run
    c = Configuration.step(0, 1)
    assert compute_M_C(c, ColorCutoffs((-3,))).positions == (3,)
    # cutoff above the window forces the outside-left run
    assert compute_M_C(c, ColorCutoffs((2,))).positions == (-2,)


def test_M_C_frozen_empty_level():
    c = Configuration(0, 1, (3, HOLE), boundary=BoundaryMode.FROZEN)
    with pytest.raises(EmptyLevel):
        compute_M_C(c, ColorCutoffs((4,)))
    with pytest.raises(EmptyLevel):
        # two records demanded from a single occupied site
        compute_M_C(c, ColorCutoffs((1, 2)))


def test_leader_example():
    assert leader(EXAMPLE, 0) == (2, 2)
    assert leader(EXAMPLE, 0, 2) == (1, 1)
    assert leader(EXAMPLE, 3) == (-1, 3)
    with pytest.raises(ValueError):
        leader(EXAMPLE, 0, 0)


def test_height_step():
    c = Configuration.step(-5, 5)
    assert height(c, 0, 0) == HeightTriple(1, 0)
    assert height(c, -3, 0) == HeightTriple(1, 3)
    # same answers through the continuation of a tiny window
    tiny = Configuration.step(0, 0)
    assert height(tiny, 0, 0) == HeightTriple(1, 0)
    assert height(tiny, -3, 0) == HeightTriple(1, 3)
    assert height(tiny, -3, -2) == HeightTriple(1, 5)


def test_height_example():
    assert height(EXAMPLE, 1, 0) == HeightTriple(1, 1)
    assert height(EXAMPLE, 0, 0) == HeightTriple(0, 2)


def test_projections_example():
    assert project_voter(EXAMPLE).tolist() == [0, 0, -1, -1, -2, -2, -2]
    assert project_coalescence(EXAMPLE).tolist() == [1, 0, 1, 0, 1, 0, 0]
    assert project_ranking(EXAMPLE).tolist() == [1, 2, 1, 3, 1, 4, 5]


def test_projections_step():
    c = Configuration.step(-3, 3)
    assert project_voter(c).tolist() == [3, 2, 1, 0, -1, -2, -3]
    assert project_coalescence(c).tolist() == [1] * 7
    assert project_ranking(c).tolist() == [1] * 7


def test_inverse_example():
    inv = EXAMPLE.inverse()
    assert (inv.window_lo, inv.window_hi) == (-2, 4)
    # position of each type -2..4
    assert inv.cells == (0, -2, -4, 1, 2, -1, -3)
    assert inv.inverse() == EXAMPLE


RANDOM_CONFIGS = [
    random_reachable_configuration(-6, 6, n_swaps, StreamRNG(11, k))
    for k, n_swaps in enumerate([0, 1, 3, 8, 20, 40, 100])
]


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_involution_random(config):
    assert config.inverse().inverse() == config


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_coalescence_is_voter_border(config):
    # coalescence sites are exactly the left borders of voter clusters
    v = project_voter(config)
    borders = np.ones(len(v), dtype=np.int64)
    borders[1:] = v[1:] != v[:-1]
    assert project_coalescence(config).tolist() == borders.tolist()


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_observable_matches_record_on_inverse(config):
    # the indicator observable equals 1{M_C of the inverse state hits the
    # composition's parts, matched through the sort of the colors}
    rng = StreamRNG(12, 1)
    for _ in range(50):
        n = 1 + rng.randint(3)
        colors = sorted(rng.randint(13) - 6 for _ in range(n))
        while any(a == b for a, b in zip(colors, colors[1:])):
            colors = sorted(rng.randint(13) - 6 for _ in range(n))
        parts = []
        while len(set(parts)) != n:
            parts = [rng.randint(9) - 4 for _ in range(n)]
        kappa = ColoredComposition(tuple(parts), tuple(colors))
        want = compute_M_C(config.inverse(),
                           ColorCutoffs(tuple(sorted(p + 1 for p in parts))))
        # compute_M_C sorts by cutoff; realign to the composition's order
        order = sorted(range(n), key=lambda i: parts[i])
        hit = all(want.positions[j] == colors[order[j]] for j in range(n))
        assert observable_O(config, kappa) == (1 if hit else 0)


def test_observable_requires_rainbow():
    frozen = Configuration(0, 1, (1, HOLE), boundary=BoundaryMode.FROZEN)
    with pytest.raises(NotInvertible):
        observable_O(frozen, ColoredComposition((0,), (1,)))
    with pytest.raises(NotInvertible):
        project_voter(frozen)


@given(st.integers(-5, 5), st.integers(-8, 3), st.integers(0, 60),
       st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_height_window_invariance(c, k, n_swaps, seed):
    # enlarging the window never changes an observable
    small = random_reachable_configuration(-4, 4, n_swaps, StreamRNG(seed, 0))
    ext = list(range(10, 4, -1)) + list(small.cells) + list(range(-5, -11, -1))
    big = Configuration.from_types(-10, ext)
    assert height(small, c, k) == height(big, c, k)


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=3, unique=True),
       st.integers(0, 60), st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_M_C_window_invariance(cuts, n_swaps, seed):
    cutoffs = ColorCutoffs(tuple(sorted(cuts)))
    small = random_reachable_configuration(-4, 4, n_swaps, StreamRNG(seed, 0))
    ext = list(range(10, 4, -1)) + list(small.cells) + list(range(-5, -11, -1))
    big = Configuration.from_types(-10, ext)
    assert compute_M_C(small, cutoffs) == compute_M_C(big, cutoffs)


@given(st.integers(0, 80), st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_M_C_interlaces(n_swaps, seed):
    # with consecutive cutoffs the records satisfy k_i distinct and the
    # level sets nest, so each k_i is at least the (n-i+1)-th max of level n
    config = random_reachable_configuration(-5, 5, n_swaps, StreamRNG(seed, 0))
    cutoffs = ColorCutoffs((-1, 0, 1))
    rec = compute_M_C(config, cutoffs)
    assert len(set(rec.positions)) == 3
    for i, c in enumerate(cutoffs.cutoffs):
        assert config.type_at(rec.positions[i]) >= c
