"""The six population CSV tables.

DriverProfile, DriverPreferences, DriverWeight, PassengerProfile,
PassengerPreferences and PassengerWeight. Booleans are written ``yes``/``no``,
enums in lower case, reals with a decimal point at full precision so a
population round-trips losslessly.
"""
import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Union

from .common import InvalidInputError
from .profiles import (
    EvaluatorRef, FeedbackAggregate, JudgmentMatrix, Population, PreferenceSpec, Role, UserProfile,
    WeightVector, build_judgment_matrix, criteria_for,
)

TABLE_NAMES = (
    "DriverProfile", "DriverPreferences", "DriverWeight",
    "PassengerProfile", "PassengerPreferences", "PassengerWeight",
)

_PROFILE_COLUMNS = {
    Role.DRIVER: ("id", "gender", "age", "status", "vh_range", "pets", "smoking", "music",
                  "social_behavior", "social_behavior_count", "driving_skills",
                  "driving_skills_count", "reliability", "reliability_count"),
    Role.PASSENGER: ("id", "gender", "age", "status", "pets", "smoking", "music",
                     "social_behavior", "social_behavior_count", "reliability", "reliability_count"),
}
_PREF_COLUMNS = {
    Role.DRIVER: ("id", "gender_pref", "age_pref", "age_tolerance", "status_pref",
                  "pets_pref", "smoking_pref", "music_pref"),
    Role.PASSENGER: ("id", "gender_pref", "age_pref", "age_tolerance", "status_pref",
                     "vhrange_pref", "pets_pref", "smoking_pref", "music_pref"),
}


class TableError(InvalidInputError):
    """Schema violation, located by table, row and column."""

    def __init__(self, table: str, row: int, column: str, message: str):
        super().__init__(f"{table}.csv row {row}, column {column!r}: {message}")
        self.table, self.row, self.column = table, row, column


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if hasattr(value, "value"):
        v = value.value
        return v.lower() if isinstance(v, str) and len(v) > 1 else v
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t not in ("yes", "no"):
        raise ValueError(f"expected yes/no, got {text!r}")
    return t == "yes"


def _write(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _profile_row(u: UserProfile):
    row = [u.id, u.gender, u.age, u.status]
    if u.role is Role.DRIVER:
        row.append(u.vh_range)
    row += [u.pets, u.smoking, u.music, u.social_behavior.mean, u.social_behavior.count]
    if u.role is Role.DRIVER:
        row += [u.driving_skills.mean, u.driving_skills.count]
    row += [u.reliability.mean, u.reliability.count]
    return row


def _pref_row(uid: str, p: PreferenceSpec, role: Role):
    row = [uid, p.gender_pref, p.age_pref, p.age_tolerance, p.status_pref]
    if role is Role.PASSENGER:
        row.append(p.vhrange_pref)
    return row + [p.pets_pref, p.smoking_pref, p.music_pref]


def population_to_tables(pop: Population) -> Dict[str, str]:
    """Serialize a population to ``{table name: CSV text}``."""
    out = {}
    for role, users in ((Role.DRIVER, pop.drivers), (Role.PASSENGER, pop.passengers)):
        prefix = "Driver" if role is Role.DRIVER else "Passenger"
        crits = criteria_for(role)
        out[prefix + "Profile"] = _write(_PROFILE_COLUMNS[role], (_profile_row(u) for u in users))
        out[prefix + "Preferences"] = _write(
            _PREF_COLUMNS[role], (_pref_row(u.id, pop.preferences[u.id], role) for u in users))
        out[prefix + "Weight"] = _write(
            ("id", *crits), ([u.id, *(pop.weights[u.id].values[c] for c in crits)] for u in users))
    return out


def _read(table: str, text: str, columns) -> List[Dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(h.strip() for h in (reader.fieldnames or ()))
    missing = [c for c in columns if c not in header]
    if missing:
        raise TableError(table, 1, missing[0], "missing column")
    rows = []
    for i, r in enumerate(reader, start=2):
        rows.append({k.strip(): (v or "").strip() for k, v in r.items() if k is not None})
        rows[-1]["__row__"] = i
    return rows


def _parse(table, row, column, fn):
    try:
        return fn(row[column])
    except (ValueError, KeyError, InvalidInputError) as exc:
        raise TableError(table, row["__row__"], column, str(exc)) from None


def _feedback(table, row, name):
    mean = _parse(table, row, name, float)
    # A bare average with no recorded history counts as one evaluation.
    count = _parse(table, row, name + "_count", int) if row.get(name + "_count", "") != "" else 1
    try:
        return FeedbackAggregate(mean, count)
    except InvalidInputError as exc:
        raise TableError(table, row["__row__"], name, str(exc)) from None


def _gender(text):
    return text.strip().upper()


def _users(tables, role: Role) -> List[UserProfile]:
    table = ("Driver" if role is Role.DRIVER else "Passenger") + "Profile"
    users = []
    for row in _read(table, tables[table], [c for c in _PROFILE_COLUMNS[role] if not c.endswith("_count")]):
        kwargs = dict(
            id=row["id"], role=role,
            gender=_parse(table, row, "gender", _gender),
            age=_parse(table, row, "age", int),
            status=_parse(table, row, "status", str.lower),
            pets=_parse(table, row, "pets", _bool),
            smoking=_parse(table, row, "smoking", _bool),
            music=_parse(table, row, "music", _bool),
            social_behavior=_feedback(table, row, "social_behavior"),
            reliability=_feedback(table, row, "reliability"),
        )
        if role is Role.DRIVER:
            kwargs["vh_range"] = _parse(table, row, "vh_range", str.lower)
            kwargs["driving_skills"] = _feedback(table, row, "driving_skills")
        try:
            users.append(UserProfile(**kwargs))
        except ValueError as exc:
            raise TableError(table, row["__row__"], "*", str(exc)) from None
    return users


def _prefs(tables, role: Role) -> Dict[str, PreferenceSpec]:
    table = ("Driver" if role is Role.DRIVER else "Passenger") + "Preferences"
    out = {}
    for row in _read(table, tables[table], _PREF_COLUMNS[role]):
        kwargs = dict(
            gender_pref=_parse(table, row, "gender_pref", _gender),
            age_pref=_parse(table, row, "age_pref", int),
            age_tolerance=_parse(table, row, "age_tolerance", int),
            status_pref=_parse(table, row, "status_pref", str.lower),
            pets_pref=_parse(table, row, "pets_pref", _bool),
            smoking_pref=_parse(table, row, "smoking_pref", _bool),
            music_pref=_parse(table, row, "music_pref", _bool),
        )
        if role is Role.PASSENGER:
            kwargs["vhrange_pref"] = _parse(table, row, "vhrange_pref", str.lower)
        try:
            out[row["id"]] = PreferenceSpec(**kwargs)
        except ValueError as exc:
            raise TableError(table, row["__row__"], "*", str(exc)) from None
    return out


def _weights(tables, role: Role) -> Dict[str, WeightVector]:
    table = ("Driver" if role is Role.DRIVER else "Passenger") + "Weight"
    crits = criteria_for(role)
    out = {}
    for row in _read(table, tables[table], ("id", *crits)):
        vals = {c: _parse(table, row, c, int) for c in crits}
        try:
            out[row["id"]] = WeightVector(role, vals)
        except InvalidInputError as exc:
            raise TableError(table, row["__row__"], "*", str(exc)) from None
    return out


def population_from_tables(tables: Dict[str, str]) -> Population:
    missing = [t for t in TABLE_NAMES if t not in tables]
    if missing:
        raise InvalidInputError(f"missing tables: {', '.join(missing)}")
    drivers = _users(tables, Role.DRIVER)
    passengers = _users(tables, Role.PASSENGER)
    prefs = {**_prefs(tables, Role.DRIVER), **_prefs(tables, Role.PASSENGER)}
    weights = {**_weights(tables, Role.DRIVER), **_weights(tables, Role.PASSENGER)}
    return Population(drivers, passengers, prefs, weights)


def write_tables(pop: Population, directory: Union[str, Path]) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, text in population_to_tables(pop).items():
        path = directory / f"{name}.csv"
        path.write_text(text, encoding="utf-8", newline="")
        paths[name] = path
    return paths


def read_tables(directory: Union[str, Path]) -> Population:
    directory = Path(directory)
    tables = {}
    for name in TABLE_NAMES:
        path = directory / f"{name}.csv"
        if path.exists():
            tables[name] = path.read_text(encoding="utf-8")
    return population_from_tables(tables)


def _fixture_feedback(value):
    if isinstance(value, dict):
        return FeedbackAggregate(float(value["mean"]), int(value.get("count", 1)))
    return FeedbackAggregate(float(value), 1)


def _fixture_profile(doc: dict, role: Role) -> UserProfile:
    kwargs = dict(
        id=doc["id"], role=role, gender=str(doc["gender"]).upper(), age=int(doc["age"]),
        status=str(doc["status"]).lower(), pets=bool(doc["pets"]), music=bool(doc["music"]),
        smoking=bool(doc["smoking"]),
        social_behavior=_fixture_feedback(doc["social_behavior"]),
        reliability=_fixture_feedback(doc["reliability"]),
    )
    if role is Role.DRIVER:
        kwargs["vh_range"] = str(doc["vh_range"]).lower()
        kwargs["driving_skills"] = _fixture_feedback(doc["driving_skills"])
    return UserProfile(**kwargs)


def read_user_fixture(text: str):
    """Load a single-user ranking fixture.

    Two JSON forms are accepted. The matrix form carries a ready judgment
    matrix (``evaluator``, ``criteria``, ``candidates``, ``entries``,
    ``weights``). The profile form carries the evaluator's ``preferences``
    and ``weights`` plus candidate ``profiles`` and builds the matrix.
    Returns ``(JudgmentMatrix, weights as an array in column order)``.
    """
    try:
        doc = json.loads(text)
        if "entries" in doc:
            criteria = tuple(doc["criteria"])
            matrix = JudgmentMatrix(doc["evaluator"], tuple(doc["candidates"]), criteria, doc["entries"])
            return matrix, [float(doc["weights"][c]) for c in criteria]
        ev = doc["evaluator"]
        role = Role(ev["role"])
        prefs = dict(ev["preferences"])
        for key in ("pets_pref", "music_pref", "smoking_pref"):
            prefs[key] = bool(prefs[key])
        spec = PreferenceSpec(**prefs)
        weights = WeightVector(role, ev["weights"])
        candidates = [_fixture_profile(c, role.opposite) for c in doc["profiles"]]
        matrix = build_judgment_matrix(EvaluatorRef(ev["id"], role), spec, candidates)
        return matrix, list(weights.as_array(matrix.criteria))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"malformed ranking fixture: {exc!r}") from None
