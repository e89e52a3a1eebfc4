"""Unconstrained optimal assignment, price of stability, and a brute-force stable-set oracle."""
import csv
import io
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .common import InvalidInputError, SizeGuardError, UndefinedMetricError, id_key
from .stable import Matching, PreferenceProfileSet

BRUTE_FORCE_LIMIT = 10


@dataclass(frozen=True)
class ValueMatrix:
    """Pair values indexed ``[driver, passenger]``; NaN marks an unacceptable pair."""
    drivers: Tuple[str, ...]
    passengers: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "drivers", tuple(self.drivers))
        object.__setattr__(self, "passengers", tuple(self.passengers))
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.drivers), len(self.passengers)):
            raise InvalidInputError(
                f"value array shape {v.shape} does not match "
                f"{len(self.drivers)} drivers x {len(self.passengers)} passengers"
            )
        if np.isinf(v).any():
            raise InvalidInputError("pair values must be finite (use NaN for unacceptable pairs)")
        object.__setattr__(self, "values", v)

    def value(self, driver: str, passenger: str) -> float:
        return float(self.values[self.drivers.index(driver), self.passengers.index(passenger)])

    def total(self, matching: Matching) -> float:
        di = {d: i for i, d in enumerate(self.drivers)}
        pi = {p: j for j, p in enumerate(self.passengers)}
        try:
            vals = [self.values[di[d], pi[p]] for d, p in matching.pairs]
        except KeyError as exc:
            raise InvalidInputError(f"matching references unknown identifier {exc.args[0]!r}") from None
        if any(np.isnan(vals)):
            raise InvalidInputError("matching uses an unacceptable pair")
        return float(sum(sorted(vals)))

    @classmethod
    def from_closeness(
        cls,
        passenger_closeness: Mapping[str, Mapping[str, float]],
        driver_closeness: Mapping[str, Mapping[str, float]],
        drivers: Optional[Sequence[str]] = None,
        passengers: Optional[Sequence[str]] = None,
    ) -> "ValueMatrix":
        """Pair value = passenger's closeness for the driver + driver's closeness for the passenger."""
        drivers = tuple(drivers if drivers is not None else driver_closeness)
        passengers = tuple(passengers if passengers is not None else passenger_closeness)
        v = np.full((len(drivers), len(passengers)), np.nan)
        for i, d in enumerate(drivers):
            for j, p in enumerate(passengers):
                a = passenger_closeness.get(p, {}).get(d)
                b = driver_closeness.get(d, {}).get(p)
                if a is not None and b is not None:
                    v[i, j] = a + b
        return cls(drivers, passengers, v)

    def to_csv(self) -> str:
        """Rows are passengers, columns are drivers."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["passenger", *self.drivers])
        for j, p in enumerate(self.passengers):
            w.writerow([p, *("" if np.isnan(x) else repr(float(x)) for x in self.values[:, j])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ValueMatrix":
        rows, cols, arr = read_matrix_csv(text)
        return cls(cols, rows, arr.T)


def read_matrix_csv(text: str) -> Tuple[List[str], List[str], np.ndarray]:
    """Parse a labelled matrix: header ``label,col1,col2,...`` then ``row,v1,v2,...``.

    Empty cells become NaN; decimal commas are not accepted.
    """
    reader = list(csv.reader(io.StringIO(text)))
    reader = [r for r in reader if r]
    if len(reader) < 2:
        raise InvalidInputError("matrix CSV needs a header row and at least one data row")
    cols = [c.strip() for c in reader[0][1:]]
    rows, data = [], []
    for lineno, r in enumerate(reader[1:], start=2):
        if len(r) != len(cols) + 1:
            raise InvalidInputError(f"line {lineno}: expected {len(cols) + 1} cells, got {len(r)}")
        rows.append(r[0].strip())
        try:
            data.append([float(x) if x.strip() else np.nan for x in r[1:]])
        except ValueError as exc:
            raise InvalidInputError(f"line {lineno}: {exc}") from None
    return rows, cols, np.array(data, dtype=float)


def closeness_from_csv(text: str) -> Dict[str, Dict[str, float]]:
    """Evaluator rows, candidate columns -> ``{evaluator: {candidate: closeness}}``."""
    rows, cols, arr = read_matrix_csv(text)
    return {r: {c: float(arr[i, j]) for j, c in enumerate(cols) if not np.isnan(arr[i, j])}
            for i, r in enumerate(rows)}


def max_weight_assignment(values: ValueMatrix) -> Tuple[Matching, float]:
    """Exact maximum-total-value one-to-one matching.

    With all pairs acceptable and non-negative the result has maximum
    cardinality. Otherwise each side is padded with zero-value "unmatched"
    slots so that leaving someone alone is allowed when it pays.
    """
    v = values.values
    n_d, n_p = v.shape
    if n_d == 0 and n_p == 0:
        raise InvalidInputError("both sides are empty")
    if n_d == 0 or n_p == 0:
        return Matching.from_pairs((), values.drivers, values.passengers), 0.0
    allowed = ~np.isnan(v)
    if allowed.all() and (v >= 0).all():
        rows, cols = linear_sum_assignment(v, maximize=True)
    else:
        size = n_d + n_p
        cost = np.full((size, size), np.inf)
        cost[:n_d, :n_p] = np.where(allowed, -np.nan_to_num(v), np.inf)
        cost[np.arange(n_d), n_p + np.arange(n_d)] = 0.0
        cost[n_d + np.arange(n_p), np.arange(n_p)] = 0.0
        cost[n_d:, n_p:] = 0.0
        rows, cols = linear_sum_assignment(cost)
        keep = (rows < n_d) & (cols < n_p)
        rows, cols = rows[keep], cols[keep]
    pairs = [(values.drivers[i], values.passengers[j]) for i, j in zip(rows, cols)]
    matching = Matching.from_pairs(pairs, values.drivers, values.passengers)
    return matching, values.total(matching)


def price_of_stability(values: ValueMatrix, stable: Matching) -> float:
    """Relative objective loss ``(A - A_s) / A`` of a stable matching."""
    optimum = max_weight_assignment(values)[1]
    if optimum == 0:
        raise UndefinedMetricError("optimal objective is zero; price of stability undefined")
    return (optimum - values.total(stable)) / optimum


def _prefers(rank: Mapping[str, int], a: Optional[str], b: Optional[str]) -> bool:
    """Whether ``a`` is strictly better than ``b`` (None = alone) under ``rank``."""
    if a is None or a not in rank:
        return False
    return b is None or b not in rank or rank[a] < rank[b]


def brute_force_stable(profiles: PreferenceProfileSet) -> List[Matching]:
    """Every stable matching, by exhaustive search over injective matchings.

    Meant as a test oracle; refuses markets with a side larger than 10.
    """
    drivers, passengers = list(profiles.drivers), list(profiles.passengers)
    if max(len(drivers), len(passengers)) > BRUTE_FORCE_LIMIT:
        raise SizeGuardError(
            f"brute-force enumeration limited to {BRUTE_FORCE_LIMIT} per side, "
            f"got {len(drivers)} x {len(passengers)}"
        )
    drank = {d: {p: i for i, p in enumerate(profiles.driver_lists[d])} for d in drivers}
    prank = {p: {d: i for i, d in enumerate(profiles.passenger_lists[p])} for p in passengers}
    acceptable = {d: [p for p in profiles.driver_lists[d] if d in prank[p]] for d in drivers}
    d_part: Dict[str, Optional[str]] = {}
    p_part: Dict[str, str] = {}
    found: List[Matching] = []

    def blocks(d, p):
        return (p in drank[d] and d in prank[p] and d_part.get(d) != p
                and _prefers(drank[d], p, d_part.get(d)) and _prefers(prank[p], d, p_part.get(p)))

    def consistent(d):
        # Only pairs whose both partners are final can be judged mid-search.
        p = d_part[d]
        if p is not None and any(blocks(other, p) for other in d_part if other != d):
            return False
        return not any(blocks(d, q) for q in p_part)

    def search(i):
        if i == len(drivers):
            if not any(blocks(d, p) for d in drivers for p in passengers):
                found.append(Matching.from_pairs(
                    ((d, p) for d, p in d_part.items() if p is not None), drivers, passengers))
            return
        d = drivers[i]
        for p in [*acceptable[d], None]:
            if p is not None and p in p_part:
                continue
            d_part[d] = p
            if p is not None:
                p_part[p] = d
            if consistent(d):
                search(i + 1)
            if p is not None:
                del p_part[p]
            del d_part[d]

    search(0)
    found.sort(key=lambda m: [(id_key(d), id_key(p)) for d, p in m.sorted_pairs()])
    return found
