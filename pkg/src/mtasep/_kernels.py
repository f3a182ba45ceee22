"""Numba event kernels shared by the Monte Carlo samplers.

Two engines are provided:

* ``clock_tasep`` — graphical construction with one exponential clock per
  bond (clocks keyed by (seed, stream_id, bond)); only currently
  admissible bonds hold a pending ring, and the full accepted-event
  sequence is recorded.  O(window) per event; meant for small windows and
  short horizons where the event log is needed.

* ``gillespie_values`` — O(1)-per-event Gillespie dynamics on an integer
  grid with the rule "swap values at (b, b+1) at rate 1 iff
  grid[b] > grid[b+1]".  Holes are encoded as 0 and colors as positive
  integers, which makes the n-particle colored TASEP (free right jumps,
  blocking by weakly higher colors, swaps with strictly lower colors) a
  special case of the same comparison rule.  Tracks the rightmost
  occupied site and counts the events that change its value (the
  leader-type changes) at requested checkpoints.

Separate small kernels implement the native voter and coalescence
dynamics.
"""

import numba
import numpy as np

from .rng import _GAMMA, _mix64, next_state, state_output, stream_state, to_unit

_U64_1 = np.uint64(1)


@numba.njit(numba.uint64(numba.uint64, numba.uint64), cache=True,
            inline="always")
def _bond_state(base, bond):
    # per-bond stream split off the (seed, stream_id) base state
    return _mix64(base + (bond + _U64_1) * _GAMMA)


@numba.njit(cache=True)
def clock_tasep(types, t, seed, stream_id, max_events):
    """Windowed value-swap dynamics with per-bond clocks.

    Mutates ``types`` in place; returns (n_events, times, bonds).
    ``max_events`` caps the log; the arrays are grown geometrically.
    """
    nb = types.shape[0] - 1
    base = stream_state(seed, stream_id)
    st = np.empty(nb, dtype=np.uint64)
    fire = np.full(nb, np.inf)
    for b in range(nb):
        st[b] = _bond_state(base, np.uint64(b))
        if types[b] > types[b + 1]:
            st[b] = next_state(st[b])
            fire[b] = -np.log1p(-to_unit(state_output(st[b])))
    cap = 256
    times = np.empty(cap, dtype=np.float64)
    bonds = np.empty(cap, dtype=np.int64)
    n_ev = 0
    while True:
        bmin = -1
        tmin = np.inf
        for b in range(nb):
            if fire[b] < tmin:
                tmin = fire[b]
                bmin = b
        if bmin < 0 or tmin > t or n_ev >= max_events:
            break
        tmp = types[bmin]
        types[bmin] = types[bmin + 1]
        types[bmin + 1] = tmp
        if n_ev == cap:
            cap *= 2
            new_t = np.empty(cap, dtype=np.float64)
            new_b = np.empty(cap, dtype=np.int64)
            new_t[:n_ev] = times
            new_b[:n_ev] = bonds
            times = new_t
            bonds = new_b
        times[n_ev] = tmin
        bonds[n_ev] = bmin
        n_ev += 1
        for b in range(max(0, bmin - 1), min(nb, bmin + 2)):
            adm = types[b] > types[b + 1]
            if adm and fire[b] == np.inf:
                st[b] = next_state(st[b])
                fire[b] = tmin - np.log1p(-to_unit(state_output(st[b])))
            elif not adm:
                fire[b] = np.inf
    return n_ev, times[:n_ev], bonds[:n_ev]


@numba.njit(cache=True)
def gillespie_values(grid, t, seed, stream_id, checkpoints):
    """O(1)-per-event value-swap dynamics on an integer grid (0 = hole).

    Counts value changes of the rightmost nonzero cell at the checkpoint
    times (an increasing array whose last entry is the horizon).  Returns
    (counts at checkpoints, overflow flag); overflow is set when the
    rightmost particle would leave the grid, in which case the caller
    must retry with a larger grid.
    """
    nb = grid.shape[0] - 1
    state = stream_state(seed, stream_id)
    # admissible bond list with positional index for O(1) removal
    adm = np.empty(nb, dtype=np.int64)
    where = np.full(nb, -1, dtype=np.int64)
    n_adm = 0
    pmax = -1
    for b in range(nb + 1):
        if grid[b] != 0:
            pmax = b
    for b in range(nb):
        if grid[b] > grid[b + 1]:
            adm[n_adm] = b
            where[b] = n_adm
            n_adm += 1
    n_ck = checkpoints.shape[0]
    counts = np.zeros(n_ck, dtype=np.int64)
    i_ck = 0
    cur = 0.0
    s_count = 0
    overflow = False
    while n_adm > 0:
        state = next_state(state)
        u1 = to_unit(state_output(state))
        cur += -np.log1p(-u1) / n_adm
        if cur > t:
            break
        while i_ck < n_ck and cur > checkpoints[i_ck]:
            counts[i_ck] = s_count
            i_ck += 1
        state = next_state(state)
        k = int(to_unit(state_output(state)) * n_adm)
        if k == n_adm:
            k = n_adm - 1
        b = adm[k]
        tmp = grid[b]
        grid[b] = grid[b + 1]
        grid[b + 1] = tmp
        if b + 1 == pmax and grid[b + 1] != 0:
            s_count += 1  # swap under the rightmost particle: its value changed
        elif b == pmax:
            pmax = b + 1  # rightmost particle jumped right
            if pmax == nb:
                overflow = True
                break
        for bb in range(max(0, b - 1), min(nb, b + 2)):
            is_adm = grid[bb] > grid[bb + 1]
            if is_adm and where[bb] < 0:
                adm[n_adm] = bb
                where[bb] = n_adm
                n_adm += 1
            elif not is_adm and where[bb] >= 0:
                k2 = where[bb]
                last = adm[n_adm - 1]
                adm[k2] = last
                where[last] = k2
                where[bb] = -1
                n_adm -= 1
    while i_ck < n_ck:
        counts[i_ck] = s_count
        i_ck += 1
    return counts, overflow


@numba.njit(cache=True)
def voter_kernel(opinions, t, seed, stream_id):
    """Native voter dynamics: opinion(b) <- opinion(b+1) at rate 1/bond.

    Bonds with equal opinions are no-ops and carry no pending event.
    Mutates ``opinions`` in place.
    """
    nb = opinions.shape[0] - 1
    state = stream_state(seed, stream_id)
    adm = np.empty(nb, dtype=np.int64)
    where = np.full(nb, -1, dtype=np.int64)
    n_adm = 0
    for b in range(nb):
        if opinions[b] != opinions[b + 1]:
            adm[n_adm] = b
            where[b] = n_adm
            n_adm += 1
    cur = 0.0
    while n_adm > 0:
        state = next_state(state)
        cur += -np.log1p(-to_unit(state_output(state))) / n_adm
        if cur > t:
            break
        state = next_state(state)
        k = int(to_unit(state_output(state)) * n_adm)
        if k == n_adm:
            k = n_adm - 1
        b = adm[k]
        opinions[b] = opinions[b + 1]
        for bb in range(max(0, b - 1), min(nb, b + 2)):
            is_adm = opinions[bb] != opinions[bb + 1]
            if is_adm and where[bb] < 0:
                adm[n_adm] = bb
                where[bb] = n_adm
                n_adm += 1
            elif not is_adm and where[bb] >= 0:
                k2 = where[bb]
                last = adm[n_adm - 1]
                adm[k2] = last
                where[last] = k2
                where[bb] = -1
                n_adm -= 1


@numba.njit(cache=True)
def coalescence_kernel(occ, t, seed, stream_id):
    """Left-jumping particles that merge on collision.

    A particle at site b+1 moves to b at rate 1; if b is occupied the two
    merge into one.  The leftmost site absorbs (particles leave the
    window).  Mutates ``occ`` in place.
    """
    nb = occ.shape[0] - 1
    state = stream_state(seed, stream_id)
    adm = np.empty(nb, dtype=np.int64)
    where = np.full(nb, -1, dtype=np.int64)
    n_adm = 0
    for b in range(nb):
        if occ[b + 1] == 1:
            adm[n_adm] = b
            where[b] = n_adm
            n_adm += 1
    cur = 0.0
    while n_adm > 0:
        state = next_state(state)
        cur += -np.log1p(-to_unit(state_output(state))) / n_adm
        if cur > t:
            break
        state = next_state(state)
        k = int(to_unit(state_output(state)) * n_adm)
        if k == n_adm:
            k = n_adm - 1
        b = adm[k]
        occ[b + 1] = 0
        occ[b] = 1  # move or merge; either way site b is occupied
        # bond b just lost its particle
        k2 = where[b]
        last = adm[n_adm - 1]
        adm[k2] = last
        where[last] = k2
        where[b] = -1
        n_adm -= 1
        if b >= 1 and where[b - 1] < 0:
            adm[n_adm] = b - 1
            where[b - 1] = n_adm
            n_adm += 1
    return occ
