import itertools
import json

import numpy as np
import pytest
from hypothesis import strategies as st

from ridematch import PreferenceProfileSet, fixture_path


def load_profiles(name):
    return PreferenceProfileSet.from_json(fixture_path(name).read_text())


def load_json(name):
    return json.loads(fixture_path(name).read_text())


def random_profiles(rng, n_d, n_p, complete=True):
    """Random preference lists; incomplete lists drop a random subset per user."""
    drivers = [f"D{i + 1}" for i in range(n_d)]
    passengers = [f"P{j + 1}" for j in range(n_p)]
    dl = {d: [str(x) for x in rng.permutation(passengers)] for d in drivers}
    pl = {p: [str(x) for x in rng.permutation(drivers)] for p in passengers}
    if not complete:
        dl = {d: l[: rng.integers(0, len(l) + 1)] for d, l in dl.items()}
        pl = {p: l[: rng.integers(0, len(l) + 1)] for p, l in pl.items()}
    return PreferenceProfileSet(drivers, passengers, dl, pl)


@st.composite
def profile_sets(draw, max_side=6, complete=True, equal=False):
    n_d = draw(st.integers(1, max_side))
    n_p = n_d if equal else draw(st.integers(1, max_side))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_profiles(np.random.default_rng(seed), n_d, n_p, complete)


# -- independent oracles -------------------------------------------------------

def scalar_blocking(profiles, pairs):
    """Blocking pairs by direct list lookups, one pair at a time."""
    d_part = dict(pairs)
    p_part = {p: d for d, p in pairs}
    out = set()
    for d in profiles.drivers:
        for p in profiles.passengers:
            dl, pl = profiles.driver_lists[d], profiles.passenger_lists[p]
            if p not in dl or d not in pl or d_part.get(d) == p:
                continue
            cur_p, cur_d = d_part.get(d), p_part.get(p)
            d_wants = cur_p is None or dl.index(p) < dl.index(cur_p)
            p_wants = cur_d is None or pl.index(d) < pl.index(cur_d)
            if d_wants and p_wants:
                out.add((d, p))
    return out


def all_matchings(drivers, passengers, allowed=lambda d, p: True):
    """Every injective partial assignment of drivers to passengers."""
    options = [list(passengers) + [None] for _ in drivers]
    for combo in itertools.product(*options):
        used = [p for p in combo if p is not None]
        if len(used) != len(set(used)):
            continue
        pairs = [(d, p) for d, p in zip(drivers, combo) if p is not None]
        if all(allowed(d, p) for d, p in pairs):
            yield pairs


def oracle_stable_set(profiles):
    acceptable = lambda d, p: p in profiles.driver_lists[d] and d in profiles.passenger_lists[p]
    return [frozenset(m) for m in all_matchings(profiles.drivers, profiles.passengers, acceptable)
            if not scalar_blocking(profiles, m)]


def oracle_max_assignment(values):
    """Best total over all partial assignments that avoid NaN pairs."""
    v = values.values
    best = 0.0
    di = range(len(values.drivers))
    for combo in itertools.product(*[list(range(len(values.passengers))) + [None] for _ in di]):
        used = [j for j in combo if j is not None]
        if len(used) != len(set(used)):
            continue
        vals = [v[i, j] for i, j in zip(di, combo) if j is not None]
        if any(np.isnan(vals)):
            continue
        best = max(best, sum(vals))
    return best


@pytest.fixture
def smp4():
    return load_profiles("smp_4.json")


@pytest.fixture
def inst3x6():
    return load_profiles("instance_3x6.json")


@pytest.fixture
def inst4x3():
    return load_profiles("instance_4x3.json")
