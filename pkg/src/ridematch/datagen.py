"""Seeded synthetic populations and matching instances derived from them.

Randomness comes from numpy's PCG64 bit generator, seeded explicitly, so a
given (config, seed) reproduces the same population on every platform.
"""
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .assignment import ValueMatrix
from .common import ConfigError, id_key
from .profiles import (
    COLD_START_FEEDBACK, FeedbackAggregate, Gender, Population, PreferenceSpec, Role, Status,
    UserProfile, VehicleRange, WeightVector, criteria_for, judgment_tensor,
)
from .ranking import batch_closeness
from .stable import PreferenceProfileSet
from .tables import population_to_tables

RNG_ALGORITHM = "numpy.random.PCG64"

_CATEGORICAL = {
    "gender": list(Gender),
    "status": list(Status),
    "vh_range": list(VehicleRange),
    "pets": [False, True],
    "smoking": [False, True],
    "music": [False, True],
}


@dataclass(frozen=True)
class GenConfig:
    """Generation parameters.

    ``skew="clustered"`` draws every user from one of ``n_clusters`` latent
    groups. Each group has a prototype value per categorical attribute; a
    user's profile attributes and preferences copy the prototype with
    probability ``cluster_strength`` and are uniform otherwise. This preset
    is our own construction, not derived from any source data.
    """
    n_drivers: int
    n_passengers: int
    seed: int = 0
    skew: str = "uniform"
    n_clusters: int = 4
    cluster_strength: float = 0.7
    age_range: Tuple[int, int] = (19, 80)
    age_mean: float = 35.0
    age_sd: float = 12.0
    tolerance_range: Tuple[int, int] = (1, 20)
    feedback_alpha: float = 4.0
    feedback_beta: float = 3.0
    feedback_max_count: int = 40
    cold_start: float = COLD_START_FEEDBACK

    def __post_init__(self):
        object.__setattr__(self, "age_range", tuple(self.age_range))
        object.__setattr__(self, "tolerance_range", tuple(self.tolerance_range))
        if self.n_drivers < 1 or self.n_passengers < 1:
            raise ConfigError("n_drivers and n_passengers must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.skew not in ("uniform", "clustered"):
            raise ConfigError(f"unknown skew preset {self.skew!r}")
        lo, hi = self.age_range
        if not 18 < lo <= hi:
            raise ConfigError("age_range must satisfy 18 < low <= high")
        t_lo, t_hi = self.tolerance_range
        if not 1 <= t_lo <= t_hi <= 20:
            raise ConfigError("tolerance_range must lie within [1, 20]")
        if self.n_clusters < 1 or not 0.0 <= self.cluster_strength <= 1.0:
            raise ConfigError("need n_clusters >= 1 and cluster_strength in [0, 1]")
        if self.age_sd <= 0 or self.feedback_alpha <= 0 or self.feedback_beta <= 0:
            raise ConfigError("distribution parameters must be positive")
        if self.feedback_max_count < 0 or not 0.0 <= self.cold_start <= 10.0:
            raise ConfigError("invalid feedback parameters")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["age_range"] = list(self.age_range)
        d["tolerance_range"] = list(self.tolerance_range)
        return d


class _Sampler:
    def __init__(self, config: GenConfig):
        self.cfg = config
        self.rng = np.random.Generator(np.random.PCG64(config.seed))
        k = config.n_clusters if config.skew == "clustered" else 1
        self.prototypes = {name: self.rng.integers(len(vals), size=k) for name, vals in _CATEGORICAL.items()}
        self.age_centers = self._ages(k)

    def _ages(self, n, centers=None):
        lo, hi = self.cfg.age_range
        mean = self.cfg.age_mean if centers is None else centers
        out = np.round(self.rng.normal(mean, self.cfg.age_sd, size=n))
        bad = (out < lo) | (out > hi)
        while bad.any():
            redraw_mean = mean if centers is None else np.asarray(centers)[bad]
            out[bad] = np.round(self.rng.normal(redraw_mean, self.cfg.age_sd, size=int(bad.sum())))
            bad = (out < lo) | (out > hi)
        return out.astype(int)

    def clusters(self, n):
        if self.cfg.skew == "uniform":
            return np.zeros(n, dtype=int)
        return self.rng.integers(self.cfg.n_clusters, size=n)

    def categorical(self, name, cluster):
        vals = _CATEGORICAL[name]
        uniform = self.rng.integers(len(vals), size=len(cluster))
        if self.cfg.skew == "uniform":
            idx = uniform
        else:
            keep = self.rng.random(len(cluster)) < self.cfg.cluster_strength
            idx = np.where(keep, self.prototypes[name][cluster], uniform)
        return [vals[i] for i in idx]

    def ages(self, cluster):
        if self.cfg.skew == "uniform":
            return self._ages(len(cluster))
        return self._ages(len(cluster), self.age_centers[cluster].astype(float))

    def feedback(self, n):
        counts = self.rng.integers(self.cfg.feedback_max_count + 1, size=n)
        means = 10.0 * self.rng.beta(self.cfg.feedback_alpha, self.cfg.feedback_beta, size=n)
        return [FeedbackAggregate(float(m), int(c)) if c > 0 else FeedbackAggregate(self.cfg.cold_start, 0)
                for m, c in zip(means, counts)]

    def weights(self, n, role):
        crits = criteria_for(role)
        w = self.rng.integers(0, 11, size=(n, len(crits)))
        return [WeightVector(role, {c: int(x) for c, x in zip(crits, row)}) for row in w]

    def side(self, role: Role, n: int, prefix: str):
        cl = self.clusters(n)
        ids = [f"{prefix}{i + 1}" for i in range(n)]
        attrs = {name: self.categorical(name, cl) for name in ("gender", "status", "pets", "smoking", "music")}
        ages = self.ages(cl)
        sb, rel = self.feedback(n), self.feedback(n)
        is_driver = role is Role.DRIVER
        vh = self.categorical("vh_range", cl) if is_driver else [None] * n
        ds = self.feedback(n) if is_driver else [None] * n
        users = [
            UserProfile(
                id=ids[i], role=role, gender=attrs["gender"][i], age=int(ages[i]), status=attrs["status"][i],
                pets=bool(attrs["pets"][i]), music=bool(attrs["music"][i]), smoking=bool(attrs["smoking"][i]),
                social_behavior=sb[i], reliability=rel[i], vh_range=vh[i], driving_skills=ds[i],
            )
            for i in range(n)
        ]
        pref_attrs = {name: self.categorical(name, cl) for name in ("gender", "status", "pets", "smoking", "music")}
        age_pref = self.ages(cl)
        t_lo, t_hi = self.cfg.tolerance_range
        tol = self.rng.integers(t_lo, t_hi + 1, size=n)
        vh_pref = self.categorical("vh_range", cl) if not is_driver else [None] * n
        prefs = {
            ids[i]: PreferenceSpec(
                gender_pref=pref_attrs["gender"][i], age_pref=int(age_pref[i]), age_tolerance=int(tol[i]),
                status_pref=pref_attrs["status"][i], pets_pref=bool(pref_attrs["pets"][i]),
                music_pref=bool(pref_attrs["music"][i]), smoking_pref=bool(pref_attrs["smoking"][i]),
                vhrange_pref=vh_pref[i],
            )
            for i in range(n)
        }
        weights = dict(zip(ids, self.weights(n, role)))
        return users, prefs, weights


def generate_population(config: GenConfig) -> Population:
    """Draw drivers then passengers; identical for identical configs."""
    s = _Sampler(config)
    drivers, d_prefs, d_w = s.side(Role.DRIVER, config.n_drivers, "D")
    passengers, p_prefs, p_w = s.side(Role.PASSENGER, config.n_passengers, "P")
    return Population(drivers, passengers, {**d_prefs, **p_prefs}, {**d_w, **p_w})


def manifest(config: GenConfig, tables: Mapping[str, str]) -> dict:
    return {
        "generator": RNG_ALGORITHM,
        "config": config.to_dict(),
        "seed": config.seed,
        "skew_preset_note": "skew presets are synthetic constructions of this package",
        "sha256": {name: hashlib.sha256(text.encode("utf-8")).hexdigest() for name, text in sorted(tables.items())},
    }


def write_population(config: GenConfig, directory: Union[str, Path]) -> Dict[str, Path]:
    """Generate and write the six tables plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tables = population_to_tables(generate_population(config))
    paths = {}
    for name, text in tables.items():
        paths[name] = directory / f"{name}.csv"
        paths[name].write_text(text, encoding="utf-8", newline="")
    paths["manifest"] = directory / "manifest.json"
    paths["manifest"].write_text(json.dumps(manifest(config, tables), indent=2, sort_keys=True) + "\n",
                                 encoding="utf-8", newline="")
    return paths


def _rank(closeness: Mapping[str, float]) -> Tuple[str, ...]:
    return tuple(sorted(closeness, key=lambda c: (-closeness[c], id_key(c))))


def instance_from_closeness(
    passenger_closeness: Mapping[str, Mapping[str, float]],
    driver_closeness: Mapping[str, Mapping[str, float]],
    drivers: Optional[Sequence[str]] = None,
    passengers: Optional[Sequence[str]] = None,
) -> Tuple[PreferenceProfileSet, ValueMatrix]:
    """Turn per-user closeness tables into preference lists and pair values."""
    drivers = tuple(drivers if drivers is not None else driver_closeness)
    passengers = tuple(passengers if passengers is not None else passenger_closeness)
    profiles = PreferenceProfileSet(
        drivers,
        passengers,
        {d: _rank(driver_closeness[d]) for d in drivers},
        {p: _rank(passenger_closeness[p]) for p in passengers},
    )
    return profiles, ValueMatrix.from_closeness(passenger_closeness, driver_closeness, drivers, passengers)


def closeness_tables(pop: Population) -> Tuple[np.ndarray, np.ndarray]:
    """TOPSIS closeness of every user for every correspondent.

    Returns ``(driver_side, passenger_side)`` with shapes (drivers, passengers)
    and (passengers, drivers).
    """
    out = []
    for evaluators, candidates in ((pop.drivers, pop.passengers), (pop.passengers, pop.drivers)):
        tensor, criteria = judgment_tensor(evaluators, pop.preferences, candidates)
        w = np.array([pop.weights[e.id].as_array(criteria) for e in evaluators])
        out.append(batch_closeness(tensor, w))
    return out[0], out[1]


def derive_matching_instance(pop: Population) -> Tuple[PreferenceProfileSet, ValueMatrix]:
    """Rank every user's correspondents with TOPSIS and build the matching inputs."""
    d_side, p_side = closeness_tables(pop)
    d_ids = [d.id for d in pop.drivers]
    p_ids = [p.id for p in pop.passengers]
    # Pre-sort columns by identifier so the stable argsort breaks ties by id.
    p_rank_ids = sorted(range(len(p_ids)), key=lambda j: id_key(p_ids[j]))
    d_rank_ids = sorted(range(len(d_ids)), key=lambda i: id_key(d_ids[i]))
    driver_lists = {}
    for i, d in enumerate(d_ids):
        row = d_side[i, p_rank_ids]
        order = np.argsort(-row, kind="stable")
        driver_lists[d] = tuple(p_ids[p_rank_ids[k]] for k in order)
    passenger_lists = {}
    for j, p in enumerate(p_ids):
        row = p_side[j, d_rank_ids]
        order = np.argsort(-row, kind="stable")
        passenger_lists[p] = tuple(d_ids[d_rank_ids[k]] for k in order)
    profiles = PreferenceProfileSet(d_ids, p_ids, driver_lists, passenger_lists)
    return profiles, ValueMatrix(d_ids, p_ids, d_side + p_side.T)
