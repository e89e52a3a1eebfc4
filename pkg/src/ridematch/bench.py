"""Experiment harness: size sweeps over generated markets.

Every (size, trial) cell draws its own seed from the plan seed and the cell
coordinates, so cells are independent and the output depends only on the
plan. Wall-clock timings are opt-in and go to a separate file because they
are the one non-reproducible output.
"""
import csv
import io
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from statistics import mean, pstdev
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .assignment import BRUTE_FORCE_LIMIT, brute_force_stable, max_weight_assignment
from .common import ConfigError, RideMatchError, SizeGuardError
from .datagen import GenConfig, derive_matching_instance, generate_population
from .metrics import REPORT_COLUMNS, metric_report
from .stable import ALGORITHMS, verify_formulation

ORACLE_LIMIT = 6

PRESETS = {
    "equal": [(n, n) for n in (5, 10, 25, 50, 100, 250, 500, 1000)],
    "unequal-drivers": [(500, n) for n in (5, 50, 100, 250, 400, 500, 600, 750, 1000)],
    "unequal-passengers": [(n, 500) for n in (5, 50, 100, 250, 400, 500, 600, 750, 1000)],
}

FIGURES = {
    "fig_regret.csv": "regret",
    "fig_egalitarian.csv": "egalitarian_norm",
    "fig_sex_equality.csv": "sex_equality_norm",
    "fig_price_of_stability.csv": "delta",
}


class VerificationError(RideMatchError):
    """An algorithm emitted a matching that fails the formulation check."""


@dataclass
class ExperimentPlan:
    sizes: List[Tuple[int, int]]
    trials: int = 30
    algorithms: Tuple[str, ...] = ("sm", "gs")
    seed: int = 0
    output_dir: Optional[str] = None
    mode: str = "bench"
    skew: str = "uniform"
    oracle: bool = False
    timing: bool = False

    def __post_init__(self):
        self.sizes = [tuple(int(x) for x in s) for s in self.sizes]
        self.algorithms = tuple(self.algorithms)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.sizes or any(min(s) < 1 for s in self.sizes):
            raise ConfigError("sizes must be non-empty pairs of positive counts")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms {unknown}")
        if self.mode not in ("rank", "match", "verify", "bench", "scenario"):
            raise ConfigError(f"unknown mode {self.mode!r}")

    def algorithms_for(self, n_drivers: int, n_passengers: int) -> Tuple[str, ...]:
        """GS is only planned for equal-size cells."""
        return tuple(a for a in self.algorithms if a != "gs" or n_drivers == n_passengers)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentPlan":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed plan JSON: {exc}") from None
        if "preset" in doc:
            doc["sizes"] = PRESETS[doc.pop("preset")]
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_json(self) -> str:
        # The output location is not part of the experiment, so reruns into
        # different directories produce identical plan files.
        doc = asdict(self)
        doc.pop("output_dir")
        return json.dumps(doc, indent=2)


def cell_seed(plan_seed: int, size_index: int, trial: int) -> int:
    ss = np.random.SeedSequence(plan_seed, spawn_key=(size_index, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def run_cell(plan: ExperimentPlan, size_index: int, trial: int) -> Tuple[List[dict], Dict[str, float]]:
    n_d, n_p = plan.sizes[size_index]
    seed = cell_seed(plan.seed, size_index, trial)
    pop = generate_population(GenConfig(n_d, n_p, seed=seed, skew=plan.skew))
    profiles, values = derive_matching_instance(pop)
    _, optimum = max_weight_assignment(values)
    stable_set = brute_force_stable(profiles) if plan.oracle else None
    rows, timings = [], {}
    for name in plan.algorithms_for(n_d, n_p):
        start = time.perf_counter()
        matching = ALGORITHMS[name](profiles)
        timings[name] = time.perf_counter() - start
        report = verify_formulation(profiles, matching)
        if not report.ok:
            raise VerificationError(f"{name} on cell {size_index}/{trial}: {report.violations}")
        if stable_set is not None and matching not in stable_set:
            raise VerificationError(f"{name} on cell {size_index}/{trial}: not in the brute-force stable set")
        metrics = metric_report(profiles, matching)
        metrics.objective = values.total(matching)
        metrics.price_of_stability = (optimum - metrics.objective) / optimum if optimum else float("nan")
        rows.append(metrics.as_row(f"s{size_index}-t{trial}", name, n_d, n_p))
    return rows, timings


def run_bench(plan: ExperimentPlan) -> Tuple[List[dict], List[dict]]:
    """Run every cell; returns (result rows, timing rows)."""
    if plan.oracle and max(max(s) for s in plan.sizes) > ORACLE_LIMIT:
        raise SizeGuardError(
            f"brute-force cross-checks are limited to sides <= {ORACLE_LIMIT} "
            f"(enumeration itself caps at {BRUTE_FORCE_LIMIT})"
        )
    rows, timing_rows = [], []
    for si in range(len(plan.sizes)):
        for t in range(plan.trials):
            cell_rows, timings = run_cell(plan, si, t)
            rows.extend(cell_rows)
            n_d, n_p = plan.sizes[si]
            timing_rows.extend(
                {"n_drivers": n_d, "n_passengers": n_p, "trial": t, "algorithm": a, "seconds": s}
                for a, s in timings.items()
            )
    return rows, timing_rows


def summarize(rows: Sequence[dict], metric: str) -> List[dict]:
    """Mean and population standard deviation of one metric per (size, algorithm)."""
    groups: Dict[tuple, List[float]] = {}
    for r in rows:
        groups.setdefault((r["n_drivers"], r["n_passengers"], r["algorithm"]), []).append(float(r[metric]))
    out = []
    for (n_d, n_p, alg), vals in groups.items():
        out.append({"n_drivers": n_d, "n_passengers": n_p, "algorithm": alg, "trials": len(vals),
                    "mean": mean(vals), "std": pstdev(vals)})
    return out


def _cell(x):
    return repr(x) if isinstance(x, float) else x


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def write_bench(plan: ExperimentPlan, rows, timing_rows, directory: Union[str, Path]) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {"results.csv": to_csv(rows, REPORT_COLUMNS), "plan.json": plan.to_json() + "\n"}
    for fname, metric in FIGURES.items():
        files[fname] = to_csv(summarize(rows, metric),
                              ("n_drivers", "n_passengers", "algorithm", "trials", "mean", "std"))
    if plan.timing:
        files["timing.csv"] = to_csv(timing_rows, ("n_drivers", "n_passengers", "trial", "algorithm", "seconds"))
    paths = {}
    for name, text in files.items():
        paths[name] = directory / name
        paths[name].write_text(text, encoding="utf-8", newline="")
    return paths
