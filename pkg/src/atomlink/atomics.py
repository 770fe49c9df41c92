"""Rubidium ground-sublevel model, named Raman pulses, Bell-basis utilities.

Six 5S_1/2 sublevels matter for the protocol. The working pair for stored
qubits is split across both hyperfine manifolds:

    a = |F=2, m_F=-1>      b = |F=2, m_F=+1>
    c = |F=1, m_F=-1>      d = |F=1, m_F=+1>
    x = auxiliary shelf in the F=2 manifold (spectrally selected)
    z = |F=1, m_F=0>       (auxiliary ground state for phase flips)

The integer values are frozen: serialization, the kernels and CLI output all
depend on them. Excited states never appear: off-resonant Raman pulses are
reduced to effective two-level rotations, and the cycling transition enters
only as a classical fluorescence channel.

Every coherent control with a frequency difference inherits its phase from
one shared oscillator. An OscillatorFrame pins that oscillator's accumulated
phase omega_M*t and offset xi at the reference instant; the corresponding
qubit phase factor is theta = exp(-i(omega_M*t + xi)).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from . import qcore
from .qcore import Operator, SpaceLabel, StateVector

LEVEL_DIM = 6

SQRT_HALF = 1.0 / math.sqrt(2.0)


class AtomLevel(enum.IntEnum):
    """Ground-sublevel labels with frozen indices 0..5."""

    a = 0
    b = 1
    c = 2
    d = 3
    x = 4
    z = 5


class BellOutcome(enum.IntEnum):
    """The four Bell-measurement outcomes, ordered as the 2-bit message.

    The classical message Alice sends is the index in binary:
    A+ -> 00, A- -> 01, B+ -> 10, B- -> 11.
    """

    APLUS = 0
    AMINUS = 1
    BPLUS = 2
    BMINUS = 3

    @property
    def bits(self) -> str:
        return format(int(self), "02b")

    @property
    def text(self) -> str:
        return ("A+", "A-", "B+", "B-")[int(self)]

    @classmethod
    def from_text(cls, text: str) -> BellOutcome:
        try:
            return cls(("A+", "A-", "B+", "B-").index(text))
        except ValueError:
            raise ValueError(f"unknown Bell outcome {text!r}") from None


@dataclass(frozen=True)
class OscillatorFrame:
    """Shared-oscillator reference: accumulated phase omega_M*t and offset xi."""

    omega_m_t: float = 0.0
    xi: float = 0.0

    @property
    def theta(self) -> complex:
        return cmath.exp(-1j * (self.omega_m_t + self.xi))


@dataclass(frozen=True)
class PulseSpec:
    """One effective two-level Raman rotation: level pair, area, oscillator phase."""

    pair: tuple[AtomLevel, AtomLevel]
    area: float
    phase: float
    label: str = ""

    def operator(self) -> Operator:
        return qcore.two_level_rotation(
            LEVEL_DIM, int(self.pair[0]), int(self.pair[1]), self.area, self.phase
        )


def atom_space(name: str) -> SpaceLabel:
    return qcore.space((name, LEVEL_DIM))


def apply_pulse(state: StateVector, pulse: PulseSpec, target: str) -> StateVector:
    return qcore.apply(state, pulse.operator(), target)


def bell_state(kind: BellOutcome, frame: OscillatorFrame) -> StateVector:
    """Single-atom Bell basis state on atom 2.

    A+- = (|c> +- theta|b>)/sqrt(2),  B+- = (|d> +- theta|a>)/sqrt(2),
    with theta the frame's oscillator phase factor.
    """
    theta = frame.theta
    amps = [0.0] * LEVEL_DIM
    sign = 1.0 if kind in (BellOutcome.APLUS, BellOutcome.BPLUS) else -1.0
    if kind in (BellOutcome.APLUS, BellOutcome.AMINUS):
        amps[AtomLevel.c] = SQRT_HALF
        amps[AtomLevel.b] = sign * SQRT_HALF * theta
    else:
        amps[AtomLevel.d] = SQRT_HALF
        amps[AtomLevel.a] = sign * SQRT_HALF * theta
    return StateVector(atom_space("atom2"), amps)


def bell_map_sequence(frame: OscillatorFrame) -> list[PulseSpec]:
    """The two pi/2 pulses that map Bell states onto bare levels.

    With both pulse phases locked to the preparation oscillator (offset by
    pi/2 under the qcore rotation convention), the composite sends

        A+ -> |c>,  A- -> |b>,  B+ -> |d>,  B- -> |a>,

    each up to an individual global phase. The pulses address disjoint level
    pairs, so their order is irrelevant.
    """
    phi = frame.omega_m_t + frame.xi + 0.5 * math.pi
    return [
        PulseSpec((AtomLevel.c, AtomLevel.b), 0.5 * math.pi, phi, "bell_map_cb"),
        PulseSpec((AtomLevel.d, AtomLevel.a), 0.5 * math.pi, phi, "bell_map_da"),
    ]


# Bare level each Bell state lands on after bell_map_sequence.
BELL_TO_LEVEL = {
    BellOutcome.APLUS: AtomLevel.c,
    BellOutcome.AMINUS: AtomLevel.b,
    BellOutcome.BPLUS: AtomLevel.d,
    BellOutcome.BMINUS: AtomLevel.a,
}

_PI = math.pi

_NAMED_PULSES = {
    # shelve/unshelve move |d> population out of the F=1 probe manifold;
    # unshelve uses phase pi so the pair composes to the exact identity.
    "shelve_d": ((AtomLevel.d, AtomLevel.x), _PI, 0.0),
    "unshelve_d": ((AtomLevel.d, AtomLevel.x), _PI, _PI),
    "swap_ac": ((AtomLevel.a, AtomLevel.c), _PI, 0.0),
    "swap_bd": ((AtomLevel.b, AtomLevel.d), _PI, 0.0),
    "swap_ab": ((AtomLevel.a, AtomLevel.b), _PI, 0.0),
    # 2pi detour through |z> multiplies the |a> amplitude by -1.
    "phase_flip_a": ((AtomLevel.a, AtomLevel.z), 2.0 * _PI, 0.0),
}


def named_pulse(name: str) -> PulseSpec:
    """Protocol pulse by name: shelve_d, unshelve_d, swap_ac, swap_bd, swap_ab, phase_flip_a."""
    try:
        pair, area, phase = _NAMED_PULSES[name]
    except KeyError:
        raise ValueError(
            f"unknown pulse {name!r}; known: {sorted(_NAMED_PULSES)}"
        ) from None
    return PulseSpec(pair, area, phase, name)
