"""Command-line front end: budget | capture | teleport.

Scenarios are JSON files mirroring the dataclass fields; flags override file
values and the embedded default scenario supplies the production numbers
(15 dB per arm, 25% per-cycle detection, 30 cycles, 30 ns emission time,
unit loading). All primary output is deterministic for a fixed scenario:
CSV floats carry 17 significant digits, randomness comes only from the
scenario seed, and diagnostics go to stderr.

Exit codes: 0 success, 1 usage/config error, 2 campaign exhaustion,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from . import capture, kernels, linkmath, teleport
from .atomics import BellOutcome, OscillatorFrame
from .capture import ExhaustedError
from .linkmath import LinkBudget
from .teleport import DetectorModel

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EXHAUSTED = 2
EXIT_IO = 3

_TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    pass


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; that code is reserved for
    # exhaustion here, so usage errors are rethrown and mapped to 1.
    def error(self, message):
        raise _UsageError(message)


@dataclass(frozen=True)
class SweepSpec:
    name: str
    start: float
    stop: float
    steps: int

    def values(self):
        if self.steps < 1:
            raise ConfigError("sweep needs at least one step")
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class Scenario:
    """One fully specified run: link budget, detector, inputs, seed, output."""

    budget: LinkBudget
    detector: DetectorModel
    teleport_inputs: str | tuple = "random(1000)"
    seed: int = 42
    output_path: str | None = None
    sweep: SweepSpec | None = None
    target_pairs: int = 1000
    workers: int = 1
    max_trials_per_pair: int = capture.DEFAULT_MAX_TRIALS_PER_PAIR
    per_trial_csv: bool = False


def default_scenario() -> Scenario:
    budget = LinkBudget()
    return Scenario(budget=budget, detector=DetectorModel(budget.p_miss, budget.n_cycles))


def scenario_to_dict(sc: Scenario) -> dict:
    out = {
        "budget": dataclasses.asdict(sc.budget),
        "detector": dataclasses.asdict(sc.detector),
        "teleport_inputs": sc.teleport_inputs
        if isinstance(sc.teleport_inputs, str)
        else [list(entry) for entry in sc.teleport_inputs],
        "seed": sc.seed,
        "output_path": sc.output_path,
        "sweep": dataclasses.asdict(sc.sweep) if sc.sweep else None,
        "target_pairs": sc.target_pairs,
        "workers": sc.workers,
        "max_trials_per_pair": sc.max_trials_per_pair,
        "per_trial_csv": sc.per_trial_csv,
    }
    return out


def scenario_from_dict(data: dict) -> Scenario:
    try:
        budget = LinkBudget(**data.get("budget", {}))
        det_data = data.get("detector")
        detector = (
            DetectorModel(**det_data)
            if det_data
            else DetectorModel(budget.p_miss, budget.n_cycles)
        )
        sweep_data = data.get("sweep")
        sweep = SweepSpec(**sweep_data) if sweep_data else None
        inputs = data.get("teleport_inputs", "random(1000)")
        if not isinstance(inputs, str):
            inputs = tuple(tuple(float(x) for x in entry) for entry in inputs)
            for entry in inputs:
                if len(entry) != 4:
                    raise ConfigError(
                        "each teleport input needs 4 numbers: alpha_re, alpha_im, beta_re, beta_im"
                    )
        sc = Scenario(
            budget=budget,
            detector=detector,
            teleport_inputs=inputs,
            seed=int(data.get("seed", 42)),
            output_path=data.get("output_path"),
            sweep=sweep,
            target_pairs=int(data.get("target_pairs", 1000)),
            workers=int(data.get("workers", 1)),
            max_trials_per_pair=int(
                data.get("max_trials_per_pair", capture.DEFAULT_MAX_TRIALS_PER_PAIR)
            ),
            per_trial_csv=bool(data.get("per_trial_csv", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario: {exc}") from exc
    _validate(sc)
    return sc


def _validate(sc: Scenario):
    if (sc.detector.p_miss, sc.detector.n_cycles) != (sc.budget.p_miss, sc.budget.n_cycles):
        raise ConfigError(
            "detector (p_miss, n_cycles) disagrees with budget: "
            f"{(sc.detector.p_miss, sc.detector.n_cycles)} vs "
            f"{(sc.budget.p_miss, sc.budget.n_cycles)}"
        )
    if sc.target_pairs < 1:
        raise ConfigError("target_pairs must be >= 1")
    if sc.workers < 1:
        raise ConfigError("workers must be >= 1")
    if isinstance(sc.teleport_inputs, str) and not _RANDOM_RE.match(sc.teleport_inputs):
        raise ConfigError(
            f"teleport_inputs must be 'random(N)' or a list, got {sc.teleport_inputs!r}"
        )


_RANDOM_RE = re.compile(r"^random\((\d+)\)$")

_SWEEPABLE = ("loss_db", "p_miss", "n_cycles", "eta_joint", "eta_single",
              "t_fluor", "trial_overhead")


def _parse_sweep(text: str) -> SweepSpec:
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"sweep must be name:start:stop:steps, got {text!r}")
    name, start, stop, steps = parts
    if name not in _SWEEPABLE:
        raise ConfigError(f"cannot sweep {name!r}; one of {_SWEEPABLE}")
    try:
        return SweepSpec(name, float(start), float(stop), int(steps))
    except ValueError as exc:
        raise ConfigError(f"bad sweep bounds: {exc}") from exc


def load_scenario(args) -> Scenario:
    data = scenario_to_dict(default_scenario())
    file_data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid scenario JSON: {exc}") from exc
        data.update(file_data)

    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["output_path"] = args.out
    if getattr(args, "pairs", None) is not None:
        data["target_pairs"] = args.pairs
    if getattr(args, "runs", None) is not None:
        data["teleport_inputs"] = f"random({args.runs})"
    if getattr(args, "trials", None) is not None:
        data["max_trials_per_pair"] = args.trials
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers
    if getattr(args, "per_trial_csv", False):
        data["per_trial_csv"] = True
    if getattr(args, "sweep", None) is not None:
        sp = _parse_sweep(args.sweep)
        data["sweep"] = dataclasses.asdict(sp)
    # Keep the detector tied to the budget unless the file pinned it apart.
    if "detector" not in file_data:
        data["detector"] = {
            "p_miss": data["budget"].get("p_miss", LinkBudget().p_miss),
            "n_cycles": data["budget"].get("n_cycles", LinkBudget().n_cycles),
        }
    return scenario_from_dict(data)


def _fmt(value) -> str:
    if value is None:
        return "unbounded"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _emit_csv(path: str | None, lines):
    """Write CSV lines (no trailing newline in items) to path or stdout, LF only."""
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _summary(items):
    for key, value in items:
        sys.stdout.write(f"{key}={_fmt(value)}\n")


# --- budget ----------------------------------------------------------------

BUDGET_CSV_COLUMNS = (
    "loss_db", "p_miss", "n_cycles", "eta_joint", "eta_single", "t_fluor",
    "lambda", "epsilon", "snr_db", "expected_trials", "pair_time_s",
    "herald_fidelity",
)


def _budget_row(budget: LinkBudget) -> str:
    eps = budget.epsilon
    values = (
        budget.loss_db, budget.p_miss, budget.n_cycles,
        budget.eta_joint, budget.eta_single, budget.t_fluor,
        budget.lambda_arm, eps, linkmath.snr_db(eps),
        linkmath.expected_trials(budget.loss_db),
        linkmath.pair_generation_time(budget),
        linkmath.herald_fidelity(
            budget.lambda_arm, budget.eta_joint, budget.eta_single, eps
        ),
    )
    return ",".join(_fmt(v) for v in values)


def cmd_budget(sc: Scenario) -> int:
    """Closed-form table: one row per sweep point (or one row, no sweep)."""
    budgets = [sc.budget]
    if sc.sweep is not None:
        budgets = []
        for value in sc.sweep.values():
            if sc.sweep.name == "n_cycles":
                value = int(round(float(value)))
            else:
                value = float(value)
            budgets.append(dataclasses.replace(sc.budget, **{sc.sweep.name: value}))
    lines = [",".join(BUDGET_CSV_COLUMNS)]
    lines.extend(_budget_row(b) for b in budgets)
    _summary([("command", "budget"), ("rows", len(budgets))])
    _emit_csv(sc.output_path, lines)
    return EXIT_OK


# --- capture -----------------------------------------------------------------

def cmd_capture(sc: Scenario) -> int:
    """Run a capture campaign; per-trial CSV is flag-gated."""
    if sc.per_trial_csv:
        if sc.output_path is None:
            raise ConfigError("per-trial CSV needs an output path (--out)")
        with open(sc.output_path, "w", encoding="utf-8", newline="") as fh:
            stats = capture.run_campaign_traced(
                sc.budget, sc.target_pairs, sc.seed, fh,
                max_trials_per_pair=sc.max_trials_per_pair,
            )
    else:
        stats = capture.run_campaign(
            sc.budget, sc.target_pairs, sc.seed,
            workers=sc.workers, max_trials_per_pair=sc.max_trials_per_pair,
        )
    _summary(
        [("command", "capture"), ("seed", sc.seed), ("workers", sc.workers)]
        + stats.summary_items()
    )
    return EXIT_OK


# --- teleport ----------------------------------------------------------------

def _teleport_runs(sc: Scenario):
    inputs = sc.teleport_inputs
    if isinstance(inputs, str):
        count = int(_RANDOM_RE.match(inputs).group(1))
        explicit = None
    else:
        count = len(inputs)
        explicit = inputs
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(sc.seed, spawn_key=(i,)))
        if explicit is None:
            v = rng.standard_normal(4)
            alpha = complex(v[0], v[1])
            beta = complex(v[2], v[3])
        else:
            are, aim, bre, bim = explicit[i]
            alpha = complex(are, aim)
            beta = complex(bre, bim)
        norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm <= 0.0:
            raise ConfigError(f"teleport input {i} is the zero state")
        alpha /= norm
        beta /= norm
        frame = OscillatorFrame(rng.random() * _TWO_PI, rng.random() * _TWO_PI)
        yield i, alpha, beta, frame, rng


def cmd_teleport(sc: Scenario) -> int:
    """One pipeline run per input; CSV rows plus a summary block."""
    det = sc.detector
    lines = [teleport.TELEPORT_CSV_HEADER]
    fids = []
    conf_counts = np.zeros((4, 4), dtype=np.int64)
    for i, alpha, beta, frame, rng in _teleport_runs(sc):
        rec = teleport.teleport_once(alpha, beta, frame, det, rng)
        lines.append(teleport.teleport_csv_row(i, alpha, beta, rec))
        fids.append(rec.fidelity)
        conf_counts[rec.outcome, rec.reported_outcome] += 1

    n = len(fids)
    if n == 0:
        raise ConfigError("teleport_inputs is empty")
    reported_hist = conf_counts.sum(axis=0)
    items = [
        ("command", "teleport"),
        ("seed", sc.seed),
        ("runs", n),
        ("mean_fidelity", f"{np.mean(fids):.12f}"),
        ("min_fidelity", float(np.min(fids))),
        ("misreports", int(conf_counts.sum() - np.trace(conf_counts))),
    ]
    for outcome in BellOutcome:
        items.append((f"reported_{outcome.text}", int(reported_hist[outcome])))
    if det.p_miss > 0.0:
        exact = teleport.confusion_matrix(det)
        row_tot = conf_counts.sum(axis=1)
        for i_true in BellOutcome:
            for j_rep in BellOutcome:
                mc = (
                    conf_counts[i_true, j_rep] / row_tot[i_true]
                    if row_tot[i_true]
                    else 0.0
                )
                items.append(
                    (f"confusion_mc_{i_true.text}_{j_rep.text}", float(mc))
                )
                items.append(
                    (f"confusion_exact_{i_true.text}_{j_rep.text}", float(exact[i_true, j_rep]))
                )
    _summary(items)
    _emit_csv(sc.output_path, lines)
    return EXIT_OK


# --- entry point -------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(
        prog="atomlink",
        description="Entanglement-capture link budgets and atomic teleportation runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("budget", "closed-form link-budget table"),
        ("capture", "Monte-Carlo capture campaign"),
        ("teleport", "state-vector teleportation runs"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--seed", type=int, help="master seed (overrides scenario)")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--sweep", help="parameter sweep name:start:stop:steps")
        p.add_argument("--print-config", action="store_true",
                       help="dump the effective merged scenario and exit")
        if name == "capture":
            p.add_argument("--pairs", type=int, help="coincidences to collect")
            p.add_argument("--trials", type=int, help="per-pair trial cap")
            p.add_argument("--workers", type=int, help="parallel pair searches")
            p.add_argument("--per-trial-csv", action="store_true",
                           help="write every trial to the CSV (needs --out)")
        if name == "teleport":
            p.add_argument("--runs", type=int, help="number of random input states")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        sc = load_scenario(args)
        if args.print_config:
            json.dump(scenario_to_dict(sc), sys.stdout, indent=2, sort_keys=True)
            sys.stdout.write("\n")
            return EXIT_OK
        sys.stderr.write(f"atomlink: kernel backend {kernels.backend()}\n")
        handler = {"budget": cmd_budget, "capture": cmd_capture, "teleport": cmd_teleport}
        return handler[args.command](sc)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_USAGE
    except ExhaustedError as exc:
        sys.stderr.write(f"exhausted: {exc}\n")
        return EXIT_EXHAUSTED
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
