"""User profiles, preferences, weights and judgment matrices.

A judgment matrix scores every candidate correspondent (rows) against the
evaluating user's criteria (columns). Binary criteria score 1 on an exact
match, age scores decay with distance from the preferred age, and feedback
criteria copy the candidate's running feedback averages.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .common import EmptyInputError, InvalidInputError

COLD_START_FEEDBACK = 5.0


class Role(str, Enum):
    DRIVER = "driver"
    PASSENGER = "passenger"

    @property
    def opposite(self) -> "Role":
        return Role.PASSENGER if self is Role.DRIVER else Role.DRIVER


class Gender(str, Enum):
    M = "M"
    F = "F"


class Status(str, Enum):
    MARRIED = "married"
    SINGLE = "single"


class VehicleRange(str, Enum):
    BASIC = "basic"
    COMFORT = "comfort"
    LUXURY = "luxury"


class SocialBehavior(str, Enum):
    FRIENDLY = "friendly"
    POLITE = "polite"
    RUDE = "rude"


class DrivingSkills(str, Enum):
    EFFICIENT = "efficient"
    ACCEPTABLE = "acceptable"
    DANGEROUS = "dangerous"


class Reliability(str, Enum):
    EXTREMELY_RELIABLE = "extremely-reliable"
    MODERATELY_RELIABLE = "moderately-reliable"
    NOT_RELIABLE = "not-reliable"


EVALUATION_SCORES = {
    SocialBehavior.FRIENDLY: 10.0,
    SocialBehavior.POLITE: 5.0,
    SocialBehavior.RUDE: 0.0,
    DrivingSkills.EFFICIENT: 10.0,
    DrivingSkills.ACCEPTABLE: 5.0,
    DrivingSkills.DANGEROUS: 0.0,
    Reliability.EXTREMELY_RELIABLE: 10.0,
    Reliability.MODERATELY_RELIABLE: 5.0,
    Reliability.NOT_RELIABLE: 0.0,
}

EVALUATION_CATEGORIES = {
    "social_behavior": SocialBehavior,
    "driving_skills": DrivingSkills,
    "reliability": Reliability,
}

# Canonical column order. A driver evaluates passengers, who have no vehicle
# and no driving record, so those two criteria only exist for passengers.
PASSENGER_CRITERIA = (
    "gender", "age", "status", "vhrange", "pets", "smoking", "music",
    "social_behavior", "driving_skills", "reliability",
)
DRIVER_CRITERIA = tuple(c for c in PASSENGER_CRITERIA if c not in ("vhrange", "driving_skills"))
BINARY_CRITERIA = ("gender", "status", "vhrange", "pets", "smoking", "music")
FEEDBACK_CRITERIA = ("social_behavior", "driving_skills", "reliability")

# criterion -> (preference attribute, profile attribute)
_BINARY_FIELDS = {
    "gender": ("gender_pref", "gender"),
    "status": ("status_pref", "status"),
    "vhrange": ("vhrange_pref", "vh_range"),
    "pets": ("pets_pref", "pets"),
    "smoking": ("smoking_pref", "smoking"),
    "music": ("music_pref", "music"),
}


def criteria_for(role: Role) -> Tuple[str, ...]:
    """Criteria used by an evaluator of the given role."""
    return DRIVER_CRITERIA if Role(role) is Role.DRIVER else PASSENGER_CRITERIA


@dataclass(frozen=True)
class FeedbackAggregate:
    mean: float = COLD_START_FEEDBACK
    count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.mean <= 10.0:
            raise InvalidInputError(f"feedback mean {self.mean} outside [0, 10]")
        if self.count < 0:
            raise InvalidInputError(f"negative feedback count {self.count}")


def apply_feedback(agg: FeedbackAggregate, score: float) -> FeedbackAggregate:
    """Fold one evaluation score into a running average.

    The first evaluation replaces the cold-start default outright.
    """
    score = float(score)
    if not 0.0 <= score <= 10.0:
        raise InvalidInputError(f"feedback score {score} outside [0, 10]")
    if agg.count == 0:
        return FeedbackAggregate(score, 1)
    mean = (agg.mean * agg.count + score) / (agg.count + 1)
    return FeedbackAggregate(min(max(mean, 0.0), 10.0), agg.count + 1)


def evaluation_to_score(label) -> float:
    """Map a post-trip evaluation label to its score in {0, 5, 10}."""
    try:
        return EVALUATION_SCORES[label]
    except KeyError:
        raise InvalidInputError(f"unknown evaluation label {label!r}") from None


@dataclass(frozen=True)
class UserProfile:
    id: str
    role: Role
    gender: Gender
    age: int
    status: Status
    pets: bool
    music: bool
    smoking: bool
    social_behavior: FeedbackAggregate = field(default_factory=FeedbackAggregate)
    reliability: FeedbackAggregate = field(default_factory=FeedbackAggregate)
    vh_range: Optional[VehicleRange] = None
    driving_skills: Optional[FeedbackAggregate] = None

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "gender", Gender(self.gender))
        object.__setattr__(self, "status", Status(self.status))
        if self.vh_range is not None:
            object.__setattr__(self, "vh_range", VehicleRange(self.vh_range))
        if int(self.age) != self.age or self.age <= 18:
            raise InvalidInputError(f"{self.id}: age must be an integer > 18, got {self.age}")
        is_driver = self.role is Role.DRIVER
        if is_driver != (self.vh_range is not None) or is_driver != (self.driving_skills is not None):
            raise InvalidInputError(
                f"{self.id}: vh_range and driving_skills must be set exactly for drivers"
            )
        for name in ("pets", "music", "smoking"):
            if not isinstance(getattr(self, name), (bool, np.bool_)):
                raise InvalidInputError(f"{self.id}: {name} must be boolean")

    def feedback(self, criterion: str) -> FeedbackAggregate:
        return getattr(self, criterion)

    def with_feedback(self, criterion: str, score: float) -> "UserProfile":
        """Return a copy with one more evaluation folded into ``criterion``."""
        if criterion not in FEEDBACK_CRITERIA or self.feedback(criterion) is None:
            raise InvalidInputError(f"{self.id}: no feedback criterion {criterion!r}")
        return replace(self, **{criterion: apply_feedback(self.feedback(criterion), score)})


@dataclass(frozen=True)
class EvaluatorRef:
    """Stands in for an evaluator whose own profile is unknown or irrelevant."""
    id: str
    role: Role

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))


@dataclass(frozen=True)
class PreferenceSpec:
    """What a user wants in a correspondent.

    Feedback criteria carry no preferred value; they only have weights.
    """
    gender_pref: Gender
    age_pref: int
    age_tolerance: int
    status_pref: Status
    pets_pref: bool
    music_pref: bool
    smoking_pref: bool
    vhrange_pref: Optional[VehicleRange] = None

    def __post_init__(self):
        object.__setattr__(self, "gender_pref", Gender(self.gender_pref))
        object.__setattr__(self, "status_pref", Status(self.status_pref))
        if self.vhrange_pref is not None:
            object.__setattr__(self, "vhrange_pref", VehicleRange(self.vhrange_pref))
        if self.age_pref <= 18:
            raise InvalidInputError(f"age_pref must be > 18, got {self.age_pref}")
        if not 1 <= self.age_tolerance <= 20:
            raise InvalidInputError(f"age_tolerance must be in [1, 20], got {self.age_tolerance}")

    def check_owner(self, role: Role) -> None:
        if (Role(role) is Role.PASSENGER) != (self.vhrange_pref is not None):
            raise InvalidInputError("vhrange_pref must be set exactly for passengers")


@dataclass(frozen=True)
class WeightVector:
    role: Role
    values: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        expected = set(criteria_for(self.role))
        if set(self.values) != expected:
            raise InvalidInputError(
                f"weights for a {self.role.value} must cover exactly {sorted(expected)}"
            )
        for name, w in self.values.items():
            if not 0 <= w <= 10:
                raise InvalidInputError(f"weight {name}={w} outside [0, 10]")
        object.__setattr__(self, "values", dict(self.values))

    @property
    def criteria(self) -> Tuple[str, ...]:
        return criteria_for(self.role)

    def as_array(self, criteria: Optional[Sequence[str]] = None) -> np.ndarray:
        criteria = self.criteria if criteria is None else criteria
        try:
            return np.array([self.values[c] for c in criteria], dtype=float)
        except KeyError as exc:
            raise InvalidInputError(f"no weight for criterion {exc.args[0]!r}") from None


@dataclass(frozen=True)
class JudgmentMatrix:
    evaluator_id: str
    candidate_ids: Tuple[str, ...]
    criteria: Tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "candidate_ids", tuple(self.candidate_ids))
        object.__setattr__(self, "criteria", tuple(self.criteria))
        if entries.shape != (len(self.candidate_ids), len(self.criteria)):
            raise InvalidInputError(
                f"entries shape {entries.shape} does not match "
                f"{len(self.candidate_ids)} candidates x {len(self.criteria)} criteria"
            )

    def row(self, candidate_id: str) -> np.ndarray:
        return self.entries[self.candidate_ids.index(candidate_id)]

    def column(self, criterion: str) -> np.ndarray:
        return self.entries[:, self.criteria.index(criterion)]


def binary_score(pref_value, prof_value) -> float:
    """1.0 when the preferred value equals the candidate's value, else 0.0."""
    if _domain(pref_value) is not _domain(prof_value):
        raise InvalidInputError(
            f"cannot compare {pref_value!r} with {prof_value!r}: different attribute domains"
        )
    return 1.0 if pref_value == prof_value else 0.0


def _domain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool
    if isinstance(value, Enum):
        return type(value)
    if isinstance(value, (str, int)):
        return type(value)
    raise InvalidInputError(f"{value!r} is not a categorical attribute value")


def age_score(age_pref: int, age_tolerance: int, age: int) -> float:
    """``tolerance / (|age - age_pref| + tolerance)``, in (0, 1]."""
    if age_tolerance < 1:
        raise InvalidInputError(f"age_tolerance must be >= 1, got {age_tolerance}")
    return age_tolerance / (abs(age - age_pref) + age_tolerance)


def _score(criterion: str, prefs: PreferenceSpec, cand: UserProfile) -> float:
    if criterion == "age":
        return age_score(prefs.age_pref, prefs.age_tolerance, cand.age)
    if criterion in FEEDBACK_CRITERIA:
        agg = cand.feedback(criterion)
        if agg is None:
            raise InvalidInputError(f"{cand.id}: missing {criterion} feedback")
        return agg.mean
    pref_attr, prof_attr = _BINARY_FIELDS[criterion]
    pref_value, prof_value = getattr(prefs, pref_attr), getattr(cand, prof_attr)
    if prof_value is None:
        raise InvalidInputError(f"{cand.id}: missing {prof_attr}")
    return binary_score(pref_value, prof_value)


def build_judgment_matrix(
    evaluator: Union[UserProfile, EvaluatorRef],
    preferences: PreferenceSpec,
    candidates: Sequence[UserProfile],
) -> JudgmentMatrix:
    """Score each candidate against the evaluator's criteria, in input order."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyInputError(f"{evaluator.id}: no candidates to judge")
    preferences.check_owner(evaluator.role)
    for cand in candidates:
        if cand.role is not evaluator.role.opposite:
            raise InvalidInputError(
                f"{cand.id} is a {cand.role.value}; {evaluator.id} can only judge "
                f"{evaluator.role.opposite.value}s"
            )
    criteria = criteria_for(evaluator.role)
    entries = [[_score(c, preferences, cand) for c in criteria] for cand in candidates]
    return JudgmentMatrix(evaluator.id, tuple(c.id for c in candidates), criteria, np.array(entries))


@dataclass
class Population:
    """Both sides of a market: profiles plus each user's preferences and weights."""
    drivers: Sequence[UserProfile]
    passengers: Sequence[UserProfile]
    preferences: Dict[str, PreferenceSpec]
    weights: Dict[str, WeightVector]

    def __post_init__(self):
        self.drivers = list(self.drivers)
        self.passengers = list(self.passengers)
        ids = [u.id for u in self.users()]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("duplicate user identifiers")
        for role, users in ((Role.DRIVER, self.drivers), (Role.PASSENGER, self.passengers)):
            for u in users:
                if u.role is not role:
                    raise InvalidInputError(f"{u.id} listed as {role.value} but is {u.role.value}")
                if u.id not in self.preferences or u.id not in self.weights:
                    raise InvalidInputError(f"{u.id}: missing preferences or weights")
                self.preferences[u.id].check_owner(role)
                if self.weights[u.id].role is not role:
                    raise InvalidInputError(f"{u.id}: weight vector is for the wrong role")

    def users(self) -> Iterable[UserProfile]:
        yield from self.drivers
        yield from self.passengers

    def judgment_matrix(self, user_id: str) -> JudgmentMatrix:
        user = next(u for u in self.users() if u.id == user_id)
        others = self.passengers if user.role is Role.DRIVER else self.drivers
        return build_judgment_matrix(user, self.preferences[user_id], others)


# Batch construction: all evaluators of one side at once.

def _code(values, enum_type) -> np.ndarray:
    members = list(enum_type)
    return np.array([members.index(v) for v in values], dtype=np.int64)


def judgment_tensor(
    evaluators: Sequence[UserProfile],
    preferences: Mapping[str, PreferenceSpec],
    candidates: Sequence[UserProfile],
) -> Tuple[np.ndarray, Tuple[str, ...]]:
    """Stack the judgment matrices of many same-role evaluators.

    Returns an array of shape (evaluators, candidates, criteria) whose slice
    ``[e]`` equals ``build_judgment_matrix(evaluators[e], ...).entries``.
    """
    if not evaluators or not candidates:
        raise EmptyInputError("need at least one evaluator and one candidate")
    role = evaluators[0].role
    if any(e.role is not role for e in evaluators) or any(c.role is not role.opposite for c in candidates):
        raise InvalidInputError("evaluators must share one role, candidates the other")
    prefs = [preferences[e.id] for e in evaluators]
    criteria = criteria_for(role)
    out = np.empty((len(evaluators), len(candidates), len(criteria)))
    for j, crit in enumerate(criteria):
        if crit == "age":
            want = np.array([p.age_pref for p in prefs], dtype=float)[:, None]
            tol = np.array([p.age_tolerance for p in prefs], dtype=float)[:, None]
            age = np.array([c.age for c in candidates], dtype=float)[None, :]
            out[:, :, j] = tol / (np.abs(age - want) + tol)
        elif crit in FEEDBACK_CRITERIA:
            out[:, :, j] = np.array([c.feedback(crit).mean for c in candidates])[None, :]
        else:
            pref_attr, prof_attr = _BINARY_FIELDS[crit]
            want = [getattr(p, pref_attr) for p in prefs]
            have = [getattr(c, prof_attr) for c in candidates]
            enum_type = type(have[0]) if isinstance(have[0], Enum) else None
            if enum_type is None:
                want_arr, have_arr = np.array(want, dtype=bool), np.array(have, dtype=bool)
            else:
                want_arr, have_arr = _code(want, enum_type), _code(have, enum_type)
            out[:, :, j] = want_arr[:, None] == have_arr[None, :]
    return out, criteria
