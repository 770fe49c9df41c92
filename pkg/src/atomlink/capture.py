"""Monte-Carlo simulation of the two-node entanglement-capture protocol.

Each trial launches one photon pair: per-arm fiber survival s = 10^(-L/10),
joint loading with a single eta_joint draw when both arrive (momentum
correlation), eta_single when only one does. A node heralds when its atom
captured a photon (no fluorescence seen) — or falsely, with probability
epsilon = p_miss^N, when N probe cycles on an empty atom all go undetected.
A declared pair is a coincidence of both heralds; it is genuine only if both
atoms really captured.

Campaigns are reproducible by construction: pair k draws from the substream
SeedSequence(master_seed, spawn_key=(k,)), so results are identical for any
worker count, and aggregation is plain integer sums.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .linkmath import LinkBudget

DEFAULT_MAX_TRIALS_PER_PAIR = 10_000_000

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


class ExhaustedError(RuntimeError):
    """A pair search hit its trial cap before any coincidence."""

    def __init__(self, pair_index: int, max_trials: int):
        super().__init__(
            f"pair {pair_index}: no coincidence within {max_trials} trials"
        )
        self.pair_index = pair_index
        self.max_trials = max_trials


@dataclass(frozen=True)
class TrialRecord:
    """Ground truth and herald decisions of one capture trial."""

    trial_index: int
    arrived: tuple[bool, bool]
    absorbed: tuple[bool, bool]
    heralded: tuple[bool, bool]

    @property
    def coincidence(self) -> bool:
        return self.heralded[0] and self.heralded[1]

    @property
    def true_pair(self) -> bool:
        return self.absorbed[0] and self.absorbed[1]


@dataclass(frozen=True)
class CampaignStats:
    """Aggregate of one capture campaign."""

    trials_total: int
    pairs_declared: int
    pairs_true: int
    empirical_fidelity: float
    mean_trials_per_pair: float
    elapsed_sim_time: float
    confidence_halfwidth: float

    def summary_items(self) -> list[tuple[str, object]]:
        return [
            ("trials_total", self.trials_total),
            ("pairs_declared", self.pairs_declared),
            ("pairs_true", self.pairs_true),
            ("empirical_fidelity", self.empirical_fidelity),
            ("mean_trials_per_pair", self.mean_trials_per_pair),
            ("elapsed_sim_time", self.elapsed_sim_time),
            ("confidence_halfwidth", self.confidence_halfwidth),
        ]


def _search_args(budget: LinkBudget):
    return budget.survival, budget.eta_joint, budget.eta_single, budget.epsilon


def run_trial(budget: LinkBudget, rng: np.random.Generator, trial_index: int = 0) -> TrialRecord:
    """Sample one capture trial (consumes one 5-draw randomness block)."""
    _, _, a0, a1, b0, b1, h0, h1 = kernels.capture_search(rng, *_search_args(budget), 1)
    return TrialRecord(trial_index, (a0, a1), (b0, b1), (h0, h1))


def run_until_pair(
    budget: LinkBudget,
    rng: np.random.Generator,
    max_trials: int = DEFAULT_MAX_TRIALS_PER_PAIR,
) -> tuple[int, TrialRecord | None]:
    """Repeat trials until a coincidence.

    Returns (trials_used, record of the coinciding trial), or
    (trials_used, None) when max_trials ran out — exhaustion is an explicit
    outcome, not an error.
    """
    found, used, a0, a1, b0, b1, h0, h1 = kernels.capture_search(
        rng, *_search_args(budget), max_trials
    )
    record = TrialRecord(used - 1, (a0, a1), (b0, b1), (h0, h1))
    return (used, record) if found else (used, None)


def _pair_rng(master_seed: int, pair_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(pair_index,))
    )


def _assemble(budget: LinkBudget, target_pairs: int, trials_total: int, true_total: int) -> CampaignStats:
    fid = true_total / target_pairs
    half = _Z95 * math.sqrt(max(fid * (1.0 - fid), 0.0) / target_pairs)
    return CampaignStats(
        trials_total=trials_total,
        pairs_declared=target_pairs,
        pairs_true=true_total,
        empirical_fidelity=fid,
        mean_trials_per_pair=trials_total / target_pairs,
        elapsed_sim_time=trials_total * budget.trial_time,
        confidence_halfwidth=half,
    )


def run_campaign(
    budget: LinkBudget,
    target_pairs: int,
    master_seed: int,
    workers: int = 1,
    max_trials_per_pair: int = DEFAULT_MAX_TRIALS_PER_PAIR,
) -> CampaignStats:
    """Collect target_pairs coincidences; raises ExhaustedError on a stuck pair.

    Bit-identical results for a fixed master_seed at any worker count: every
    pair owns a deterministic substream and the aggregate is a sum.
    """
    if target_pairs < 1:
        raise ValueError("target_pairs must be >= 1")
    args = _search_args(budget)

    def search(pair_index: int) -> tuple[int, bool]:
        rng = _pair_rng(master_seed, pair_index)
        found, used, _, _, b0, b1, _, _ = kernels.capture_search(
            rng, *args, max_trials_per_pair
        )
        if not found:
            raise ExhaustedError(pair_index, max_trials_per_pair)
        return used, b0 and b1

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(search, range(target_pairs)))
    else:
        results = [search(k) for k in range(target_pairs)]

    trials_total = sum(used for used, _ in results)
    true_total = sum(1 for _, true in results if true)
    return _assemble(budget, target_pairs, trials_total, true_total)


TRIAL_CSV_HEADER = (
    "pair_index,trial_index,arrived0,arrived1,absorbed0,absorbed1,"
    "heralded0,heralded1,coincidence,true_pair"
)


def run_campaign_traced(
    budget: LinkBudget,
    target_pairs: int,
    master_seed: int,
    writer,
    max_trials_per_pair: int = DEFAULT_MAX_TRIALS_PER_PAIR,
) -> CampaignStats:
    """run_campaign variant that streams every trial as a CSV row to writer.

    Uses the pure tracing kernel, which replays the exact trials of the fast
    path (same substreams, same block protocol), so the returned stats equal
    run_campaign's for the same seed.
    """
    if target_pairs < 1:
        raise ValueError("target_pairs must be >= 1")
    args = _search_args(budget)
    trials_total = 0
    true_total = 0
    writer.write(TRIAL_CSV_HEADER + "\n")
    for k in range(target_pairs):
        rng = _pair_rng(master_seed, k)
        found, used, fields = kernels.capture_search_trace(rng, *args, max_trials_per_pair)
        if not found:
            raise ExhaustedError(k, max_trials_per_pair)
        co = fields["heralded0"] & fields["heralded1"]
        true = fields["absorbed0"] & fields["absorbed1"]
        for t in range(used):
            writer.write(
                f"{k},{t},{int(fields['arrived0'][t])},{int(fields['arrived1'][t])},"
                f"{int(fields['absorbed0'][t])},{int(fields['absorbed1'][t])},"
                f"{int(fields['heralded0'][t])},{int(fields['heralded1'][t])},"
                f"{int(co[t])},{int(true[t])}\n"
            )
        trials_total += used
        true_total += int(true[used - 1])
    return _assemble(budget, target_pairs, trials_total, true_total)
