"""End-to-end teleportation pipeline.

Alice holds atoms 1 and 2, Bob holds atom 3; atoms 2 and 3 start in the
symmetric entangled state (|a b> + |b a>)/sqrt(2). The pipeline is

    prepare atom 1  ->  coherence transfer 1->2  ->  Bell mapping pulses
    ->  sequential-elimination measurement of atom 2  ->  2-bit message
    ->  Bob's correction pulses on atom 3,

and with a perfect detector it reproduces the input state on atom 3 exactly
(fidelity 1 to machine precision) on every one of the four Bell branches.

The elimination measurement probes fluorescence three times (step order:
c, the F=1 manifold {c,d} after unshelving, then c again after a<->c and
b<->d swaps plus re-shelving). Detection maps step 1 -> A+, step 2 -> B+,
step 3 -> B-, exhaustion -> A-. A probe collapses the state whether or not
the detector fires; the only detector error is missing real fluorescence,
with probability epsilon = p_miss**n_cycles per probe. There are no dark
counts. (The step->outcome table for steps 3/4 follows the elimination
logic itself; a fluorescing third probe can only be the mapped |a>, i.e.
B-, and exhaustion leaves |b>, i.e. A-.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, qcore
from .atomics import (
    AtomLevel,
    BellOutcome,
    OscillatorFrame,
    atom_space,
    bell_map_sequence,
    bell_state,
    named_pulse,
)
from .qcore import StateVector, fidelity

__all__ = [
    "BellOutcome",
    "DetectorModel",
    "FluorescenceEvent",
    "TeleportRecord",
    "prepare_phi1",
    "entangled_pair_state",
    "pellizzari_transfer",
    "sequential_bell_measurement",
    "true_branch_from_log",
    "bob_correction",
    "teleport_once",
    "teleport_target",
    "bell_branch_weights",
    "confusion_matrix",
    "measurement_confusion_mc",
    "TELEPORT_CSV_HEADER",
    "teleport_csv_row",
]

PROBE_STEP_NAMES = ("probe_c_1", "probe_d", "probe_c_2")

_A, _B, _C, _D = AtomLevel.a, AtomLevel.b, AtomLevel.c, AtomLevel.d


@dataclass(frozen=True)
class DetectorModel:
    """Fluorescence detector: per-cycle miss probability and cycle count."""

    p_miss: float
    n_cycles: int

    def __post_init__(self):
        if not 0.0 <= self.p_miss <= 1.0:
            raise ValueError(f"p_miss must be in [0,1], got {self.p_miss}")
        if self.n_cycles < 1:
            raise ValueError(f"n_cycles must be >= 1, got {self.n_cycles}")

    @property
    def epsilon(self) -> float:
        """Probability that all n_cycles fluorescence photons are missed."""
        return self.p_miss ** self.n_cycles


@dataclass(frozen=True)
class FluorescenceEvent:
    """One probe of the elimination sequence, for the audit log."""

    step: str
    true_population: float
    fluoresced: bool
    detected: bool


@dataclass(frozen=True)
class TeleportRecord:
    outcome: BellOutcome            # branch the state actually collapsed into
    reported_outcome: BellOutcome   # branch Alice's message claimed
    fidelity: float
    log: tuple[FluorescenceEvent, ...]


def prepare_phi1(alpha0: complex, beta0: complex, frame: OscillatorFrame) -> StateVector:
    """Atom-1 input state alpha0|c> + beta0*theta|a> (renormalized)."""
    amps = np.zeros(6, dtype=np.complex128)
    amps[_C] = alpha0
    amps[_A] = beta0 * frame.theta
    return qcore.make_state(atom_space("atom1"), amps)


def entangled_pair_state() -> StateVector:
    """Captured-pair state of atoms 2 and 3: (|a b> + |b a>)/sqrt(2)."""
    sp = qcore.space(("atom2", 6), ("atom3", 6))
    amps = np.zeros((6, 6), dtype=np.complex128)
    amps[_A, _B] = 1.0 / math.sqrt(2.0)
    amps[_B, _A] = 1.0 / math.sqrt(2.0)
    return StateVector(sp, amps.reshape(-1))


def _pellizzari_permutation() -> np.ndarray:
    """Target basis index for each atom1 x atom2 basis index (length 36).

    The transfer acts on the product basis as c1a2 -> c1c2, c1b2 -> c1d2,
    a1a2 -> c1a2, a1b2 -> c1b2 (identity on atom 3); the remaining 32 basis
    states are mapped to the remaining targets in lexicographic order, which
    extends the isometry to a permutation unitary.
    """
    perm = np.full(36, -1, dtype=np.intp)
    pin = {
        (_C, _A): (_C, _C),
        (_C, _B): (_C, _D),
        (_A, _A): (_C, _A),
        (_A, _B): (_C, _B),
    }
    used = set()
    for (l1, l2), (m1, m2) in pin.items():
        perm[6 * l1 + l2] = 6 * m1 + m2
        used.add(6 * m1 + m2)
    free_targets = iter(t for t in range(36) if t not in used)
    for src in range(36):
        if perm[src] < 0:
            perm[src] = next(free_targets)
    return perm


_PELLIZZARI_PERM = _pellizzari_permutation()

_JOINT_SPACE = qcore.space(("atom1", 6), ("atom2", 6), ("atom3", 6))
_PAIR_SPACE = qcore.space(("atom2", 6), ("atom3", 6))


def pellizzari_transfer(joint: StateVector) -> StateVector:
    """Coherence transfer from atom 1 into atom 2, leaving atom 1 in |c>.

    Requires atom-1 amplitude confined to {a, c} and atom-2 amplitude to
    {a, b} (residual mass above 1e-12 raises).
    """
    qcore._check_same_space(joint.space, _JOINT_SPACE)
    psi = joint.tensor_view
    allowed1 = np.zeros(6, dtype=bool)
    allowed1[[_A, _C]] = True
    allowed2 = np.zeros(6, dtype=bool)
    allowed2[[_A, _B]] = True
    outside = ~(allowed1[:, None, None] & allowed2[None, :, None])
    leak = float(np.sqrt(np.sum(np.abs(np.where(outside, psi, 0.0)) ** 2)))
    if leak > qcore.ATOL:
        raise ValueError(
            f"transfer precondition violated: {leak:.3e} amplitude outside "
            "atom1 in {a,c} and atom2 in {a,b}"
        )
    flat = joint.amplitudes.reshape(36, 6)
    out = np.zeros_like(flat)
    out[_PELLIZZARI_PERM] = flat
    return StateVector(joint.space, out.reshape(-1))


def _measurement_pulses() -> np.ndarray:
    """(4,6,6) pulse matrices in kernel order: shelve, unshelve, swap_ac, swap_bd."""
    return np.stack(
        [
            named_pulse("shelve_d").operator().matrix,
            named_pulse("unshelve_d").operator().matrix,
            named_pulse("swap_ac").operator().matrix,
            named_pulse("swap_bd").operator().matrix,
        ]
    )


_MEASUREMENT_PULSES = _measurement_pulses()


def sequential_bell_measurement(
    state: StateVector,
    det: DetectorModel,
    rng: np.random.Generator | None = None,
    *,
    force: BellOutcome | None = None,
):
    """Measure atom 2 of an already-bell-mapped atom2 x atom3 state.

    Returns (reported, collapsed_atom3, log). The probes genuinely collapse
    the joint state, so atom 3 ends in the branch matching the *collapse*
    history even when the detector misreports; true_branch_from_log recovers
    that branch. Sampling consumes exactly 6 uniforms from rng; force=...
    drives the collapse into one outcome with a perfect detector and uses no
    randomness.
    """
    qcore._check_same_space(state.space, _PAIR_SPACE)
    amps = state.amplitudes.reshape(6, 6)
    forced = -1 if force is None else int(force)
    if forced < 0 and rng is None:
        raise ValueError("sampled measurement needs an rng")
    _true_idx, rep_idx, collapsed, raw_log = kernels.bell_measure(
        rng, amps, _MEASUREMENT_PULSES, det.epsilon, forced
    )

    row_mass = np.sum(np.abs(collapsed) ** 2, axis=1)
    lvl = int(np.argmax(row_mass))
    if row_mass[lvl] < 1.0 - 1e-9:
        raise ValueError("atom 2 not disentangled after elimination; state outside contract")
    atom3 = qcore.make_state(atom_space("atom3"), collapsed[lvl])

    log = tuple(
        FluorescenceEvent(PROBE_STEP_NAMES[step], p, fluor, det_)
        for step, p, fluor, det_ in raw_log
    )
    return BellOutcome(rep_idx), atom3, log


def true_branch_from_log(log) -> BellOutcome:
    """Collapse branch implied by the fluorescence history."""
    step_outcome = {
        "probe_c_1": BellOutcome.APLUS,
        "probe_d": BellOutcome.BPLUS,
        "probe_c_2": BellOutcome.BMINUS,
    }
    for event in log:
        if event.fluoresced:
            return step_outcome[event.step]
    return BellOutcome.AMINUS


def bob_correction(outcome: BellOutcome, atom3: StateVector) -> StateVector:
    """Bob's conditional pulses: nothing / phase flip / swap / swap+flip."""
    if len(atom3.space.subsystems) != 1 or atom3.space.total_dim != 6:
        raise ValueError("atom3 must be a single six-level subsystem")
    mass_ab = atom3.subsystem_mass(atom3.space.names[0], (_A, _B))
    if mass_ab < 1.0 - 1e-9:
        raise ValueError("correction precondition violated: amplitude outside {a,b}")
    name = atom3.space.names[0]
    state = atom3
    if outcome in (BellOutcome.BPLUS, BellOutcome.BMINUS):
        state = qcore.apply(state, named_pulse("swap_ab").operator(), name)
    if outcome in (BellOutcome.AMINUS, BellOutcome.BMINUS):
        state = qcore.apply(state, named_pulse("phase_flip_a").operator(), name)
    return state


def teleport_target(alpha0: complex, beta0: complex) -> StateVector:
    """State Bob should end with: alpha0|b> + beta0|a> on atom 3."""
    amps = np.zeros(6, dtype=np.complex128)
    amps[_B] = alpha0
    amps[_A] = beta0
    return qcore.make_state(atom_space("atom3"), amps)


def teleport_once(
    alpha0: complex,
    beta0: complex,
    frame: OscillatorFrame,
    det: DetectorModel,
    rng: np.random.Generator | None = None,
    *,
    force_branch: BellOutcome | None = None,
) -> TeleportRecord:
    """Full pipeline for one input state; consumes 6 uniforms (0 if forced)."""
    phi1 = prepare_phi1(alpha0, beta0, frame)
    joint = qcore.tensor(phi1, entangled_pair_state())
    joint = pellizzari_transfer(joint)

    # Atom 1 is left in |c> exactly; factor it out.
    cube = joint.amplitudes.reshape(6, 6, 6)
    residual = np.delete(cube, _C, axis=0)
    if float(np.sqrt(np.sum(np.abs(residual) ** 2))) > qcore.ATOL:
        raise ValueError("atom 1 not returned to |c> by the transfer")
    pair = StateVector(_PAIR_SPACE, cube[_C].reshape(-1))

    for pulse in bell_map_sequence(frame):
        pair = qcore.apply(pair, pulse.operator(), "atom2")

    reported, atom3, log = sequential_bell_measurement(
        pair, det, rng, force=force_branch
    )
    corrected = bob_correction(reported, atom3)
    fid = fidelity(corrected, teleport_target(alpha0, beta0))
    return TeleportRecord(true_branch_from_log(log), reported, fid, log)


def bell_branch_weights(alpha0: complex, beta0: complex, frame: OscillatorFrame) -> np.ndarray:
    """Born weight of each Bell branch of the post-transfer pair state.

    Asserted on amplitudes, not samples: projects the bell-mapped atom-2
    state onto the four bare landing levels.
    """
    phi1 = prepare_phi1(alpha0, beta0, frame)
    joint = pellizzari_transfer(qcore.tensor(phi1, entangled_pair_state()))
    pair = StateVector(_PAIR_SPACE, joint.amplitudes.reshape(6, 6, 6)[_C].reshape(-1))
    for pulse in bell_map_sequence(frame):
        pair = qcore.apply(pair, pulse.operator(), "atom2")
    mat = pair.amplitudes.reshape(6, 6)
    weights = np.sum(np.abs(mat) ** 2, axis=1)
    return np.array([weights[_C], weights[_B], weights[_D], weights[_A]])


# --- analytic confusion matrix -------------------------------------------

_SWAP = {_A: _C, _C: _A, _B: _D, _D: _B}


def confusion_matrix(det: DetectorModel) -> np.ndarray:
    """Exact P(reported | true branch), by brute-force enumeration.

    Independent of the measurement kernels: walks the classical level of a
    bare mapped input through the pulse schedule and enumerates every
    {detected, missed} sequence over the (at most three) fluorescing probes.
    Entry [i, j] = P(report j | true branch i); rows sum to 1.
    """
    eps = det.epsilon
    mat = np.zeros((4, 4))
    for branch in BellOutcome:
        start = {
            BellOutcome.APLUS: _C,
            BellOutcome.AMINUS: _B,
            BellOutcome.BPLUS: _D,
            BellOutcome.BMINUS: _A,
        }[branch]
        # (level, weight) pairs still undetected before each step.
        pending = [(int(start), 1.0)]
        for step, outcome in enumerate(
            (BellOutcome.APLUS, BellOutcome.BPLUS, BellOutcome.BMINUS)
        ):
            survivors = []
            for level, w in pending:
                if step == 0 and level == _D:
                    level = AtomLevel.x
                elif step == 1 and level == AtomLevel.x:
                    level = _D
                elif step == 2:
                    level = _SWAP.get(level, level)
                    if level == _D:
                        level = AtomLevel.x
                fluoresces = level == _C or (step == 1 and level == _D)
                if fluoresces:
                    mat[branch, outcome] += w * (1.0 - eps)
                    survivors.append((int(level), w * eps))
                else:
                    survivors.append((int(level), w))
            pending = survivors
        mat[branch, BellOutcome.AMINUS] += sum(w for _, w in pending)
    return mat


def measurement_confusion_mc(
    det: DetectorModel,
    n_per_branch: int,
    master_seed: int,
    frame: OscillatorFrame = OscillatorFrame(),
) -> np.ndarray:
    """Monte-Carlo confusion frequencies from the measurement itself.

    For each true branch, prepares the Bell state, applies the mapping
    pulses, and runs n_per_branch sequential measurements (batched through
    the same kernel as sequential_bell_measurement). Row i is the reported-
    outcome frequency vector for true branch i.
    """
    freq = np.zeros((4, 4))
    spectator = qcore.basis_state(atom_space("atom3"), _B)
    for branch in BellOutcome:
        pair = qcore.tensor(bell_state(branch, frame), spectator)
        for pulse in bell_map_sequence(frame):
            pair = qcore.apply(pair, pulse.operator(), "atom2")
        rng = np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(int(branch),))
        )
        _, reported = kernels.bell_measure_batch(
            rng, pair.amplitudes.reshape(6, 6), _MEASUREMENT_PULSES,
            det.epsilon, n_per_branch,
        )
        freq[branch] = np.bincount(reported, minlength=4) / n_per_branch
    return freq


# --- CSV serialization -----------------------------------------------------

TELEPORT_CSV_HEADER = (
    "seed,alpha0_re,alpha0_im,beta0_re,beta0_im,true_branch,reported_branch,fidelity"
)


def teleport_csv_row(seed: int, alpha0: complex, beta0: complex, record: TeleportRecord) -> str:
    vals = (
        f"{alpha0.real:.17g}", f"{alpha0.imag:.17g}",
        f"{beta0.real:.17g}", f"{beta0.imag:.17g}",
    )
    return (
        f"{seed}," + ",".join(vals)
        + f",{record.outcome.text},{record.reported_outcome.text},{record.fidelity:.17g}"
    )
