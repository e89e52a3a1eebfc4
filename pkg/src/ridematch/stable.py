"""Stable driver/passenger matchings for equal and unequal sets.

Pairs are always stored driver first: ``(driver_id, passenger_id)``.
"""
import heapq
import json
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .common import InvalidInputError, UnsupportedInstanceError, id_key, sort_ids

Pair = Tuple[str, str]


@dataclass(frozen=True)
class PreferenceProfileSet:
    drivers: Tuple[str, ...]
    passengers: Tuple[str, ...]
    driver_lists: Mapping[str, Tuple[str, ...]]
    passenger_lists: Mapping[str, Tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(self, "drivers", tuple(self.drivers))
        object.__setattr__(self, "passengers", tuple(self.passengers))
        object.__setattr__(self, "driver_lists", {d: tuple(self.driver_lists.get(d, ())) for d in self.drivers})
        object.__setattr__(
            self, "passenger_lists", {p: tuple(self.passenger_lists.get(p, ())) for p in self.passengers}
        )
        if len(set(self.drivers)) != len(self.drivers) or len(set(self.passengers)) != len(self.passengers):
            raise InvalidInputError("duplicate identifiers on one side")
        if set(self.drivers) & set(self.passengers):
            raise InvalidInputError("drivers and passengers must have distinct identifiers")
        for owner, lst, other in self._all_lists():
            if len(set(lst)) != len(lst):
                raise InvalidInputError(f"{owner}: repeated identifier in preference list")
            unknown = set(lst) - other
            if unknown:
                raise InvalidInputError(f"{owner}: unknown identifiers {sort_ids(unknown)}")

    def _all_lists(self):
        ps, ds = set(self.passengers), set(self.drivers)
        for d, lst in self.driver_lists.items():
            yield d, lst, ps
        for p, lst in self.passenger_lists.items():
            yield p, lst, ds

    @property
    def is_complete(self) -> bool:
        n_d, n_p = len(self.drivers), len(self.passengers)
        return all(len(l) == n_p for l in self.driver_lists.values()) and all(
            len(l) == n_d for l in self.passenger_lists.values()
        )

    @cached_property
    def driver_rank(self) -> Dict[str, Dict[str, int]]:
        """0-based position of each listed passenger, per driver."""
        return {d: {p: i for i, p in enumerate(lst)} for d, lst in self.driver_lists.items()}

    @cached_property
    def passenger_rank(self) -> Dict[str, Dict[str, int]]:
        return {p: {d: i for i, d in enumerate(lst)} for p, lst in self.passenger_lists.items()}

    @cached_property
    def _rank_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        # Unlisted partners get rank n + 1; "unmatched" sits at rank n, between the two.
        n_d, n_p = len(self.drivers), len(self.passengers)
        di = {d: i for i, d in enumerate(self.drivers)}
        pi = {p: j for j, p in enumerate(self.passengers)}
        drank = np.full((n_d, n_p), n_p + 1, dtype=np.int64)
        prank = np.full((n_d, n_p), n_d + 1, dtype=np.int64)
        for d, lst in self.driver_lists.items():
            drank[di[d], [pi[p] for p in lst]] = np.arange(len(lst))
        for p, lst in self.passenger_lists.items():
            prank[[di[d] for d in lst], pi[p]] = np.arange(len(lst))
        return drank, prank

    def is_acceptable(self, driver: str, passenger: str) -> bool:
        return passenger in self.driver_rank[driver] and driver in self.passenger_rank[passenger]

    def to_json(self) -> str:
        return json.dumps(
            {
                "drivers": list(self.drivers),
                "passengers": list(self.passengers),
                "driver_lists": {d: list(l) for d, l in self.driver_lists.items()},
                "passenger_lists": {p: list(l) for p, l in self.passenger_lists.items()},
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "PreferenceProfileSet":
        try:
            doc = json.loads(text)
            return cls(doc["drivers"], doc["passengers"], doc["driver_lists"], doc["passenger_lists"])
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"malformed preference-profile JSON: {exc}") from None


@dataclass(frozen=True)
class Matching:
    pairs: FrozenSet[Pair]
    unmatched_drivers: FrozenSet[str] = frozenset()
    unmatched_passengers: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(tuple(p) for p in self.pairs))
        object.__setattr__(self, "unmatched_drivers", frozenset(self.unmatched_drivers))
        object.__setattr__(self, "unmatched_passengers", frozenset(self.unmatched_passengers))
        ds = [d for d, _ in self.pairs]
        ps = [p for _, p in self.pairs]
        if len(set(ds)) != len(ds) or len(set(ps)) != len(ps):
            raise InvalidInputError("an identifier appears in more than one pair")
        if set(ds) & self.unmatched_drivers or set(ps) & self.unmatched_passengers:
            raise InvalidInputError("an identifier is both matched and unmatched")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair], drivers: Iterable[str], passengers: Iterable[str]) -> "Matching":
        pairs = frozenset(tuple(p) for p in pairs)
        return cls(
            pairs,
            frozenset(drivers) - {d for d, _ in pairs},
            frozenset(passengers) - {p for _, p in pairs},
        )

    @cached_property
    def driver_partner(self) -> Dict[str, str]:
        return dict(self.pairs)

    @cached_property
    def passenger_partner(self) -> Dict[str, str]:
        return {p: d for d, p in self.pairs}

    def __len__(self):
        return len(self.pairs)

    def sorted_pairs(self) -> List[Pair]:
        return sorted(self.pairs, key=lambda pr: (id_key(pr[0]), id_key(pr[1])))

    def to_json(self) -> str:
        return json.dumps(
            {
                "pairs": [list(p) for p in self.sorted_pairs()],
                "unmatched_drivers": sort_ids(self.unmatched_drivers),
                "unmatched_passengers": sort_ids(self.unmatched_passengers),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Matching":
        try:
            doc = json.loads(text)
            return cls(
                frozenset(tuple(p) for p in doc["pairs"]),
                frozenset(doc.get("unmatched_drivers", ())),
                frozenset(doc.get("unmatched_passengers", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInputError):
                raise
            raise InvalidInputError(f"malformed matching JSON: {exc}") from None


@dataclass(frozen=True)
class BlockingPair:
    driver_id: str
    passenger_id: str
    driver_current: Optional[str] = None
    passenger_current: Optional[str] = None


@dataclass
class Trace:
    """Proposal/rejection event log of one deferred-acceptance run."""
    events: List[dict] = field(default_factory=list)

    def log(self, event: str, proposer: str, receiver: str, **extra):
        self.events.append({"event": event, "proposer": proposer, "receiver": receiver, **extra})


def _check_complete(profiles: PreferenceProfileSet, what: str):
    if not profiles.is_complete:
        raise InvalidInputError(f"{what} requires complete preference lists on both sides")


def gale_shapley(profiles: PreferenceProfileSet, trace: Optional[Trace] = None) -> Matching:
    """Driver-proposing Gale-Shapley for equal-size markets.

    Each iteration takes the free driver with the smallest identifier who
    still has someone to propose to.
    """
    if len(profiles.drivers) != len(profiles.passengers):
        raise UnsupportedInstanceError(
            f"Gale-Shapley needs equal sets, got {len(profiles.drivers)} drivers "
            f"and {len(profiles.passengers)} passengers"
        )
    _check_complete(profiles, "Gale-Shapley")
    prank = profiles.passenger_rank
    next_choice = dict.fromkeys(profiles.drivers, 0)
    engaged_to: Dict[str, str] = {}  # passenger -> driver
    free = [(id_key(d), d) for d in profiles.drivers]
    heapq.heapify(free)
    while free:
        m = free[0][1]
        lst = profiles.driver_lists[m]
        if next_choice[m] >= len(lst):
            heapq.heappop(free)
            continue
        w = lst[next_choice[m]]
        next_choice[m] += 1
        if trace is not None:
            trace.log("propose", m, w)
        current = engaged_to.get(w)
        if current is None:
            engaged_to[w] = m
            heapq.heappop(free)
            if trace is not None:
                trace.log("accept", m, w)
        elif prank[w][m] < prank[w][current]:
            engaged_to[w] = m
            heapq.heapreplace(free, (id_key(current), current))
            if trace is not None:
                trace.log("accept", m, w, displaced=current)
        elif trace is not None:
            trace.log("reject", m, w)
    return Matching.from_pairs(((d, p) for p, d in engaged_to.items()), profiles.drivers, profiles.passengers)


def _proposal_chains(
    proposers: Sequence[str],
    proposer_lists: Mapping[str, Sequence[str]],
    receiver_rank: Mapping[str, Mapping[str, int]],
    trace: Optional[Trace],
) -> Dict[str, str]:
    """Deferred acceptance as a chain of proposals and refusals.

    Proposers enter one at a time in ascending identifier order. Whoever is
    refused or displaced proposes next, immediately, until the chain ends
    with a receiver who was free or a proposer whose list is exhausted.
    Returns receiver -> proposer.
    """
    counter = dict.fromkeys(proposers, 0)
    holding: Dict[str, str] = {}
    for entrant in sort_ids(proposers):
        current: Optional[str] = entrant
        while current is not None:
            lst = proposer_lists[current]
            if counter[current] >= len(lst):
                break
            target = lst[counter[current]]
            counter[current] += 1
            if trace is not None:
                trace.log("propose", current, target)
            ranks = receiver_rank[target]
            if current not in ranks:
                if trace is not None:
                    trace.log("reject", current, target)
                continue
            held = holding.get(target)
            if held is None:
                holding[target] = current
                if trace is not None:
                    trace.log("accept", current, target)
                current = None
            elif ranks[current] < ranks[held]:
                holding[target] = current
                if trace is not None:
                    trace.log("accept", current, target, displaced=held)
                current = held
            elif trace is not None:
                trace.log("reject", current, target)
    return holding


def driver_optimal(profiles: PreferenceProfileSet, trace: Optional[Trace] = None) -> Matching:
    """Stable matching with drivers proposing, whatever the set sizes."""
    held = _proposal_chains(profiles.drivers, profiles.driver_lists, profiles.passenger_rank, trace)
    return Matching.from_pairs(((d, p) for p, d in held.items()), profiles.drivers, profiles.passengers)


def passenger_optimal(profiles: PreferenceProfileSet, trace: Optional[Trace] = None) -> Matching:
    """Stable matching with passengers proposing, whatever the set sizes."""
    held = _proposal_chains(profiles.passengers, profiles.passenger_lists, profiles.driver_rank, trace)
    return Matching.from_pairs(held.items(), profiles.drivers, profiles.passengers)


def sm_match(profiles: PreferenceProfileSet, trace: Optional[Trace] = None) -> Matching:
    """Minimum-choice stable matching: the smaller set proposes.

    Drivers propose when the sets have equal size.
    """
    if len(profiles.passengers) < len(profiles.drivers):
        return passenger_optimal(profiles, trace)
    return driver_optimal(profiles, trace)


def _check_known(profiles: PreferenceProfileSet, pairs: Iterable[Pair]):
    ds, ps = set(profiles.drivers), set(profiles.passengers)
    for d, p in pairs:
        if d not in ds or p not in ps:
            raise InvalidInputError(f"pair ({d}, {p}) references an unknown identifier")


def find_blocking_pairs(profiles: PreferenceProfileSet, matching: Matching) -> List[BlockingPair]:
    """Every acceptable, unmatched-together pair where both sides prefer each other.

    An unmatched member prefers any acceptable partner to staying alone.
    """
    _check_known(profiles, matching.pairs)
    drank, prank = profiles._rank_arrays
    n_d, n_p = drank.shape
    if n_d == 0 or n_p == 0:
        return []
    di = {d: i for i, d in enumerate(profiles.drivers)}
    pi = {p: j for j, p in enumerate(profiles.passengers)}
    # Rank of the current partner; unmatched = one past the worst list position,
    # so every listed partner beats it while unlisted ones (rank n + 1) do not.
    d_cur = np.full(n_d, n_p, dtype=np.int64)
    p_cur = np.full(n_p, n_d, dtype=np.int64)
    for d, p in matching.pairs:
        d_cur[di[d]] = drank[di[d], pi[p]]
        p_cur[pi[p]] = prank[di[d], pi[p]]
    acceptable = (drank <= n_p - 1) & (prank <= n_d - 1)
    blocking = acceptable & (drank < d_cur[:, None]) & (prank < p_cur[None, :])
    out = []
    for i, j in zip(*np.nonzero(blocking)):
        d, p = profiles.drivers[i], profiles.passengers[j]
        out.append(BlockingPair(d, p, matching.driver_partner.get(d), matching.passenger_partner.get(p)))
    out.sort(key=lambda b: (id_key(b.driver_id), id_key(b.passenger_id)))
    return out


@dataclass
class FormulationReport:
    ok: bool
    violations: Dict[str, list]


def verify_formulation(profiles: PreferenceProfileSet, matching) -> FormulationReport:
    """Check a candidate matching against the integer stable-matching system.

    ``matching`` may be a :class:`Matching` or any iterable of
    (driver, passenger) pairs, so that structurally broken assignments can be
    reported instead of rejected. Constraint families: ``driver_capacity``
    (each driver at most once), ``passenger_capacity``, ``integrality``,
    ``acceptability`` (no pair outside the acceptable set) and ``stability``
    (no blocking pair).
    """
    if isinstance(matching, Matching):
        raw = list(matching.pairs)
    else:
        raw = [tuple(p) for p in matching]
    violations: Dict[str, list] = defaultdict(list)
    ds, ps = set(profiles.drivers), set(profiles.passengers)
    for pair in raw:
        if len(pair) != 2 or pair[0] not in ds or pair[1] not in ps:
            violations["integrality"].append(pair)
    raw = [p for p in raw if len(p) == 2 and p[0] in ds and p[1] in ps]
    counts_d: Dict[str, int] = defaultdict(int)
    counts_p: Dict[str, int] = defaultdict(int)
    for d, p in raw:
        counts_d[d] += 1
        counts_p[p] += 1
    for d in sort_ids(k for k, v in counts_d.items() if v > 1):
        violations["driver_capacity"].append(d)
    for p in sort_ids(k for k, v in counts_p.items() if v > 1):
        violations["passenger_capacity"].append(p)
    for d, p in sorted(set(raw), key=lambda x: (id_key(x[0]), id_key(x[1]))):
        if not profiles.is_acceptable(d, p):
            violations["acceptability"].append((d, p))
    if not violations:
        m = Matching.from_pairs(raw, profiles.drivers, profiles.passengers)
        blocking = find_blocking_pairs(profiles, m)
        if blocking:
            violations["stability"] = [(b.driver_id, b.passenger_id) for b in blocking]
    return FormulationReport(not violations, dict(violations))


ALGORITHMS = {
    "sm": sm_match,
    "gs": gale_shapley,
    "driver_opt": driver_optimal,
    "passenger_opt": passenger_optimal,
}
