"""Pure-numpy kernel backend.

Randomness protocol (shared with the compiled backend, do not change one
without the other):

* capture trials consume exactly 5 uniforms each — arrival arm 1, arrival
  arm 2, loading, false-herald arm 1, false-herald arm 2 — and are drawn in
  blocks of ``CAPTURE_BLOCK`` trials, so a search always consumes a whole
  number of blocks regardless of where the coincidence lands;
* each Bell-measurement run consumes exactly 6 uniforms — (collapse, detect)
  for the three probes — drawn up front, with the unused tail still consumed
  when the elimination terminates early. Forced-branch runs consume none.

Unused draws cost little and buy exact cross-backend reproducibility: a
result depends only on the draw prefix, never on how it was batched.

Level indices are hardcoded to the frozen AtomLevel values (c=2, d=3); a
test pins them against the enum.
"""

from __future__ import annotations

import numpy as np

CAPTURE_BLOCK = 1024
DRAWS_PER_TRIAL = 5
DRAWS_PER_MEASURE = 6

_C = 2
_D = 3

_FORCE_EPS = 1e-15

# Probe level sets for the three elimination steps, and the outcome each
# step reports on detection; exhaustion reports outcome 1 (A-).
_PROBE_ROWS = (np.array([_C]), np.array([_C, _D]), np.array([_C]))
_STEP_OUTCOME = (0, 2, 3)
_EXHAUSTED_OUTCOME = 1


def _trial_fields(u, s, eta_joint, eta_single, eps):
    """Vectorized herald logic for a (block, 5) uniform array."""
    arr0 = u[:, 0] < s
    arr1 = u[:, 1] < s
    both = arr0 & arr1
    load = u[:, 2]
    # Both photons arriving load jointly with a single draw; a lone photon
    # loads its own cavity with the single-arrival probability.
    ab0 = np.where(both, load < eta_joint, arr0 & (load < eta_single))
    ab1 = np.where(both, load < eta_joint, arr1 & (load < eta_single))
    her0 = ab0 | (u[:, 3] < eps)
    her1 = ab1 | (u[:, 4] < eps)
    return arr0, arr1, ab0, ab1, her0, her1


def capture_search(rng, s, eta_joint, eta_single, eps, max_trials):
    """Run capture trials until both nodes herald, or max_trials is hit.

    Returns (found, trials_used, arrived0, arrived1, absorbed0, absorbed1,
    heralded0, heralded1); the six booleans describe the last trial executed.
    """
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    done = 0
    while done < max_trials:
        block = min(CAPTURE_BLOCK, max_trials - done)
        u = rng.random((block, DRAWS_PER_TRIAL))
        arr0, arr1, ab0, ab1, her0, her1 = _trial_fields(u, s, eta_joint, eta_single, eps)
        hits = np.flatnonzero(her0 & her1)
        if hits.size:
            i = int(hits[0])
            return (
                True,
                done + i + 1,
                bool(arr0[i]), bool(arr1[i]),
                bool(ab0[i]), bool(ab1[i]),
                bool(her0[i]), bool(her1[i]),
            )
        done += block
    i = block - 1
    return (
        False,
        done,
        bool(arr0[i]), bool(arr1[i]),
        bool(ab0[i]), bool(ab1[i]),
        bool(her0[i]), bool(her1[i]),
    )


def capture_search_trace(rng, s, eta_joint, eta_single, eps, max_trials):
    """capture_search variant that records every executed trial.

    Returns (found, trials_used, fields) where fields is a dict of boolean
    arrays of length trials_used: arrived0/1, absorbed0/1, heralded0/1.
    Identical trials to capture_search for the same rng state.
    """
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    chunks = []
    done = 0
    found = False
    while done < max_trials and not found:
        block = min(CAPTURE_BLOCK, max_trials - done)
        u = rng.random((block, DRAWS_PER_TRIAL))
        cols = _trial_fields(u, s, eta_joint, eta_single, eps)
        her0, her1 = cols[4], cols[5]
        hits = np.flatnonzero(her0 & her1)
        if hits.size:
            stop = int(hits[0]) + 1
            chunks.append(tuple(c[:stop] for c in cols))
            done += stop
            found = True
        else:
            chunks.append(cols)
            done += block
    names = ("arrived0", "arrived1", "absorbed0", "absorbed1", "heralded0", "heralded1")
    fields = {
        name: np.concatenate([ch[k] for ch in chunks])
        for k, name in enumerate(names)
    }
    return found, done, fields


def _row_mass(state, rows):
    return float(np.sum(np.abs(state[rows, :]) ** 2))


def _collapsed(state, rows, inside, prob):
    """Renormalized projection of a (6,6) joint state; None if the branch is empty."""
    branch = prob if inside else 1.0 - prob
    if branch < _FORCE_EPS:
        return None
    out = np.zeros_like(state) if inside else state.copy()
    if inside:
        out[rows, :] = state[rows, :]
    else:
        out[rows, :] = 0.0
    norm = np.linalg.norm(out)
    if norm <= 0.0:
        return None
    return out / norm


def _step_states(amps, pulses):
    """Shared collapse tree for the three probes.

    Every run on the same input walks one of eight collapse paths; the states
    and probed masses along those paths depend only on the input, so they are
    computed once. Impossible branches hold state None and probability 0.

    Returns (p1, states1, p2, states2, p3, states3):
      p1 float, states1[b1]; p2[b1], states2[b1][b2]; p3[b1][b2] with b = 0
      for "out", 1 for "in" (states3 not needed by callers).
    """
    shelve, unshelve, swap_ac, swap_bd = pulses

    s0 = shelve @ amps
    p1 = _row_mass(s0, _PROBE_ROWS[0])
    states1 = [_collapsed(s0, _PROBE_ROWS[0], ins, p1) for ins in (False, True)]

    p2 = [0.0, 0.0]
    states2 = [[None, None], [None, None]]
    for b1 in (0, 1):
        if states1[b1] is None:
            continue
        t = unshelve @ states1[b1]
        p2[b1] = _row_mass(t, _PROBE_ROWS[1])
        states2[b1] = [_collapsed(t, _PROBE_ROWS[1], ins, p2[b1]) for ins in (False, True)]

    p3 = [[0.0, 0.0], [0.0, 0.0]]
    states3 = [[[None, None], [None, None]], [[None, None], [None, None]]]
    for b1 in (0, 1):
        for b2 in (0, 1):
            if states2[b1][b2] is None:
                continue
            w = shelve @ (swap_bd @ (swap_ac @ states2[b1][b2]))
            p3[b1][b2] = _row_mass(w, _PROBE_ROWS[2])
            states3[b1][b2] = [
                _collapsed(w, _PROBE_ROWS[2], ins, p3[b1][b2]) for ins in (False, True)
            ]
    return p1, states1, p2, states2, p3, states3


def bell_measure(rng, amps, pulses, eps, forced=-1):
    """One sequential-elimination measurement on a (6,6) atom2 x atom3 state.

    pulses is the (4,6,6) array [shelve_d, unshelve_d, swap_ac, swap_bd];
    bell mapping must already have been applied. forced in 0..3 drives the
    collapse into that outcome with a perfect detector and consumes no
    randomness; forced=-1 samples (6 uniforms).

    Returns (true_outcome, reported_outcome, collapsed (6,6), log) with log a
    list of (step, probed_mass, fluoresced, detected) for executed probes.
    """
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if forced < 0:
        u = rng.random(DRAWS_PER_MEASURE)
        pattern = None
    else:
        if int(forced) not in (0, 1, 2, 3):
            raise ValueError("forced outcome must be in 0..3")
        u = None
        # Collapse pattern per forced outcome: step at which "in" happens.
        pattern = {0: (True,), 2: (False, True), 3: (False, False, True),
                   1: (False, False, False)}[int(forced)]

    shelve, unshelve, swap_ac, swap_bd = pulses
    state = shelve @ amps
    log = []
    true_outcome = _EXHAUSTED_OUTCOME
    reported = _EXHAUSTED_OUTCOME
    in_seen = False

    for step in range(3):
        if step == 1:
            state = unshelve @ state
        elif step == 2:
            state = shelve @ (swap_bd @ (swap_ac @ state))
        rows = _PROBE_ROWS[step]
        p = _row_mass(state, rows)

        if pattern is not None:
            inside = pattern[step] if step < len(pattern) else False
            branch = p if inside else 1.0 - p
            if branch < _FORCE_EPS:
                raise ValueError(
                    f"forced outcome {forced} needs a zero-probability branch at probe {step}"
                )
            missed = False
        else:
            inside = bool(u[2 * step] < p)
            missed = bool(u[2 * step + 1] < eps)

        nxt = _collapsed(state, rows, inside, p)
        if nxt is None:
            raise ValueError("collapse onto an empty branch; state outside contract")
        state = nxt

        detected = inside and not missed
        log.append((step, p, inside, detected))

        if inside and not in_seen:
            true_outcome = _STEP_OUTCOME[step]
            in_seen = True
        if detected:
            reported = _STEP_OUTCOME[step]
            break

    return true_outcome, reported, state, log


def bell_measure_batch(rng, amps, pulses, eps, n):
    """n independent sequential measurements on copies of one (6,6) state.

    Returns (true, reported) uint8 arrays. Equivalent to n bell_measure
    calls on the same rng; the collapse tree is shared across runs because
    it depends only on the input state.
    """
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    pulses = np.ascontiguousarray(pulses, dtype=np.complex128)
    p1, _, p2, _, p3, _ = _step_states(amps, pulses)

    u = rng.random((n, DRAWS_PER_MEASURE))
    in1 = u[:, 0] < p1
    miss1 = u[:, 1] < eps
    p2_sel = np.where(in1, p2[1], p2[0])
    in2 = u[:, 2] < p2_sel
    miss2 = u[:, 3] < eps
    p3_sel = np.where(
        in1,
        np.where(in2, p3[1][1], p3[1][0]),
        np.where(in2, p3[0][1], p3[0][0]),
    )
    in3 = u[:, 4] < p3_sel
    miss3 = u[:, 5] < eps

    det1 = in1 & ~miss1
    det2 = ~det1 & in2 & ~miss2
    det3 = ~det1 & ~det2 & in3 & ~miss3

    true = np.where(in1, 0, np.where(in2, 2, np.where(in3, 3, 1))).astype(np.uint8)
    reported = np.where(det1, 0, np.where(det2, 2, np.where(det3, 3, 1))).astype(np.uint8)
    return true, reported
