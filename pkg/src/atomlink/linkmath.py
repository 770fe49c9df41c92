"""Closed-form link-budget arithmetic for one entanglement link.

Everything here is a pure function of the budget knobs: fiber survival
lambda = 10^(-L/10) per arm, detector false-positive epsilon = p^N (also
expressed as a signal-to-noise S with epsilon = 10^(-S/10)), the expected
trial count 10^(L/5), the pair-generation time, and the herald fidelity.

Survival and loading are kept separate: the per-arm loss 10^(-L/10) is due
to the fiber alone, while cavity loading happens with probability eta — and,
because the photon pair is momentum-correlated, a double arrival loads both
cavities with a single probability eta_joint, not eta^2. The defaults
eta_joint = eta_single = 1 make survival and capture coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DB_PER_DECADE = 10.0


@dataclass(frozen=True)
class LinkBudget:
    """Loss, detector, loading and timing parameters of one link."""

    loss_db: float = 15.0
    p_miss: float = 0.75
    n_cycles: int = 30
    eta_joint: float = 1.0
    eta_single: float = 1.0
    t_fluor: float = 30e-9
    trial_overhead: float = 0.0   # extra seconds per trial (source cadence etc.)

    def __post_init__(self):
        if self.loss_db < 0.0:
            raise ValueError(f"loss_db must be >= 0, got {self.loss_db}")
        if not 0.0 <= self.p_miss <= 1.0:
            raise ValueError(f"p_miss must be in [0,1], got {self.p_miss}")
        if self.n_cycles < 1:
            raise ValueError(f"n_cycles must be >= 1, got {self.n_cycles}")
        for name in ("eta_joint", "eta_single"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0,1], got {v}")
        if self.t_fluor <= 0.0:
            raise ValueError(f"t_fluor must be > 0, got {self.t_fluor}")
        if self.trial_overhead < 0.0:
            raise ValueError(f"trial_overhead must be >= 0, got {self.trial_overhead}")

    @property
    def survival(self) -> float:
        return survival_prob(self.loss_db)

    @property
    def epsilon(self) -> float:
        return false_positive_prob(self.p_miss, self.n_cycles)

    @property
    def lambda_arm(self) -> float:
        """Per-arm survive-and-load probability (joint loading factored per arm)."""
        return self.survival * self.eta_joint

    @property
    def trial_time(self) -> float:
        """Seconds consumed by one capture trial."""
        return self.n_cycles * self.t_fluor + self.trial_overhead

    def coincidence_prob(self) -> float:
        """Exact per-trial probability that both nodes herald."""
        s = self.survival
        eps = self.epsilon
        q2, q1, q0 = _herald_weights(s, self.eta_joint, self.eta_single)
        return q2 + q1 * eps + q0 * eps * eps


def survival_prob(loss_db: float) -> float:
    """Probability 10^(-L/10) that a photon survives L dB of loss."""
    if loss_db < 0.0:
        raise ValueError(f"loss_db must be >= 0, got {loss_db}")
    return 10.0 ** (-loss_db / DB_PER_DECADE)


def false_positive_prob(p_miss: float, n_cycles: int) -> float:
    """Probability p^N that the detector misses all N fluorescence cycles."""
    if not 0.0 <= p_miss <= 1.0:
        raise ValueError(f"p_miss must be in [0,1], got {p_miss}")
    if n_cycles < 1:
        raise ValueError(f"n_cycles must be >= 1, got {n_cycles}")
    return p_miss ** n_cycles


def snr_db(epsilon: float) -> float | None:
    """Effective cycling-transition signal-to-noise: epsilon = 10^(-S/10).

    Returns None for epsilon = 0 (unbounded SNR rather than a fake number).
    """
    if epsilon < 0.0 or epsilon > 1.0:
        raise ValueError(f"epsilon must be in [0,1], got {epsilon}")
    if epsilon == 0.0:
        return None
    return -DB_PER_DECADE * math.log10(epsilon)


def expected_trials(loss_db: float) -> float:
    """Mean repetitions 1/lambda^2 = 10^(L/5) to capture one pair (loss-only)."""
    if loss_db < 0.0:
        raise ValueError(f"loss_db must be >= 0, got {loss_db}")
    return 10.0 ** (loss_db / 5.0)


def pair_generation_time(budget: LinkBudget) -> float:
    """Seconds per captured pair: t_fluor x N x 10^(2L/10)."""
    return budget.t_fluor * budget.n_cycles * 10.0 ** (2.0 * budget.loss_db / DB_PER_DECADE)


def _herald_weights(s: float, eta_joint: float, eta_single: float):
    """Trial-outcome weights: (both captured, exactly one, neither).

    The remaining-mass term q0 collects every configuration in which some
    photon was lost or failed to load; those heralds are all false.
    """
    q2 = s * s * eta_joint
    q1 = 2.0 * s * (1.0 - s) * eta_single
    q0 = (1.0 - s) ** 2 + s * s * (1.0 - eta_joint) + 2.0 * s * (1.0 - s) * (1.0 - eta_single)
    return q2, q1, q0


def herald_fidelity(
    lambda_arm: float,
    eta_joint: float,
    eta_single: float,
    epsilon: float,
) -> float:
    """Probability that a declared coincidence is a genuine pair.

    lambda_arm = s * eta_joint with s the per-arm fiber survival. A captured
    atom always heralds (no dark counts); an empty atom false-heralds with
    probability epsilon, so a coincidence is true with weight q2 against
    q1*eps (one real capture plus one false herald) and q0*eps^2 (two false
    heralds). Validated against herald_fidelity_enumerated.
    """
    for name, v in (("lambda_arm", lambda_arm), ("epsilon", epsilon),
                    ("eta_joint", eta_joint), ("eta_single", eta_single)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0,1], got {v}")
    if eta_joint == 0.0:
        raise ValueError("eta_joint must be positive")
    s = lambda_arm / eta_joint
    q2, q1, q0 = _herald_weights(s, eta_joint, eta_single)
    denom = q2 + q1 * epsilon + q0 * epsilon * epsilon
    if denom <= 0.0:
        raise ValueError("no coincidences possible: all probabilities zero")
    return q2 / denom


def herald_fidelity_enumerated(
    lambda_arm: float,
    eta_joint: float,
    eta_single: float,
    epsilon: float,
) -> float:
    """Brute-force oracle for herald_fidelity.

    Enumerates the four arrival configurations, the loading outcomes of
    each, and both nodes' herald decisions, summing P(coincidence) and
    P(coincidence and both captured) exactly.
    """
    s = lambda_arm / eta_joint
    p_coinc = 0.0
    p_true = 0.0
    for arr0 in (False, True):
        for arr1 in (False, True):
            p_arr = (s if arr0 else 1.0 - s) * (s if arr1 else 1.0 - s)
            if arr0 and arr1:
                load_cases = [((True, True), eta_joint), ((False, False), 1.0 - eta_joint)]
            elif arr0 or arr1:
                got = (arr0, arr1)
                nothing = (False, False)
                load_cases = [(got, eta_single), (nothing, 1.0 - eta_single)]
            else:
                load_cases = [((False, False), 1.0)]
            for (ab0, ab1), p_load in load_cases:
                p_herald = (1.0 if ab0 else epsilon) * (1.0 if ab1 else epsilon)
                w = p_arr * p_load * p_herald
                p_coinc += w
                if ab0 and ab1:
                    p_true += w
    if p_coinc <= 0.0:
        raise ValueError("no coincidences possible: all probabilities zero")
    return p_true / p_coinc
