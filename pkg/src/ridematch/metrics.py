"""Quality metrics of a matching, computed over matched pairs only.

Ranks are 1-based: a first choice has rank 1. Normalized variants divide by
the number of matched pairs.
"""
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

from .assignment import price_of_stability
from .common import InvalidInputError, UndefinedMetricError
from .stable import Matching, PreferenceProfileSet

REPORT_COLUMNS = (
    "instance_id", "algorithm", "n_drivers", "n_passengers", "regret", "egalitarian",
    "egalitarian_norm", "sex_equality", "sex_equality_norm", "objective", "delta",
)


def _ranks(profiles: PreferenceProfileSet, matching: Matching) -> List[Tuple[int, int]]:
    """(driver's rank of passenger, passenger's rank of driver) per pair."""
    if not matching.pairs:
        raise UndefinedMetricError("metrics are undefined for an empty matching")
    out = []
    for d, p in matching.pairs:
        try:
            out.append((profiles.driver_rank[d][p] + 1, profiles.passenger_rank[p][d] + 1))
        except KeyError:
            raise InvalidInputError(f"pair ({d}, {p}) is not mutually listed") from None
    return out


def regret_cost(profiles: PreferenceProfileSet, matching: Matching) -> int:
    """Worst rank any matched participant gives their partner."""
    return max(max(a, b) for a, b in _ranks(profiles, matching))


def egalitarian_cost(profiles: PreferenceProfileSet, matching: Matching, normalized: bool = False) -> float:
    ranks = _ranks(profiles, matching)
    total = sum(a + b for a, b in ranks)
    return total / len(ranks) if normalized else float(total)


def sex_equality_cost(profiles: PreferenceProfileSet, matching: Matching, normalized: bool = False) -> float:
    """Absolute gap between the drivers' and the passengers' rank sums."""
    ranks = _ranks(profiles, matching)
    gap = abs(sum(a for a, _ in ranks) - sum(b for _, b in ranks))
    return gap / len(ranks) if normalized else float(gap)


@dataclass
class MetricReport:
    regret_cost: int
    egalitarian_cost: float
    sex_equality_cost: float
    egalitarian_norm: float
    sex_equality_norm: float
    matched_count: int
    objective: Optional[float] = None
    price_of_stability: Optional[float] = None

    def as_row(self, instance_id: str, algorithm: str, n_drivers: int, n_passengers: int) -> dict:
        return {
            "instance_id": instance_id,
            "algorithm": algorithm,
            "n_drivers": n_drivers,
            "n_passengers": n_passengers,
            "regret": self.regret_cost,
            "egalitarian": self.egalitarian_cost,
            "egalitarian_norm": self.egalitarian_norm,
            "sex_equality": self.sex_equality_cost,
            "sex_equality_norm": self.sex_equality_norm,
            "objective": "" if self.objective is None else self.objective,
            "delta": "" if self.price_of_stability is None else self.price_of_stability,
        }

    def to_dict(self) -> dict:
        return asdict(self)


def metric_report(profiles: PreferenceProfileSet, matching: Matching, values=None) -> MetricReport:
    """All metrics of one matching; objective and price of stability need ``values``."""
    ranks = _ranks(profiles, matching)
    n = len(ranks)
    drv = sum(a for a, _ in ranks)
    psg = sum(b for _, b in ranks)
    report = MetricReport(
        regret_cost=max(max(a, b) for a, b in ranks),
        egalitarian_cost=float(drv + psg),
        sex_equality_cost=float(abs(drv - psg)),
        egalitarian_norm=(drv + psg) / n,
        sex_equality_norm=abs(drv - psg) / n,
        matched_count=n,
    )
    if values is not None:
        report.objective = values.total(matching)
        report.price_of_stability = price_of_stability(values, matching)
    return report
