import hashlib
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ridematch import ConfigError, GenConfig, derive_matching_instance, generate_population
from ridematch.datagen import closeness_tables, write_population
from ridematch.profiles import Gender, Role, VehicleRange
from ridematch.tables import (
    TableError, population_from_tables, population_to_tables, read_tables, write_tables,
)


def test_same_seed_same_tables():
    a = population_to_tables(generate_population(GenConfig(20, 30, seed=5)))
    b = population_to_tables(generate_population(GenConfig(20, 30, seed=5)))
    c = population_to_tables(generate_population(GenConfig(20, 30, seed=6)))
    assert a == b
    assert a != c


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 15), st.integers(1, 15), st.sampled_from(["uniform", "clustered"]))
def test_tables_round_trip(seed, n_d, n_p, skew):
    pop = generate_population(GenConfig(n_d, n_p, seed=seed, skew=skew))
    tables = population_to_tables(pop)
    again = population_from_tables(tables)
    assert population_to_tables(again) == tables
    assert again.drivers == pop.drivers and again.passengers == pop.passengers
    assert again.preferences == pop.preferences


def test_population_invariants():
    pop = generate_population(GenConfig(200, 150, seed=1))
    for u in pop.users():
        assert 19 <= u.age <= 80
        for agg in (u.social_behavior, u.reliability, u.driving_skills):
            if agg is None:
                continue
            assert 0 <= agg.mean <= 10
            if agg.count == 0:
                assert agg.mean == 5.0
        assert (u.role is Role.DRIVER) == (u.vh_range is not None)
    for uid, w in pop.weights.items():
        assert all(0 <= x <= 10 for x in w.values.values())
    for p in pop.passengers:
        assert pop.preferences[p.id].vhrange_pref is not None
        assert 1 <= pop.preferences[p.id].age_tolerance <= 20


def test_uniform_categoricals_pass_chi_square():
    pop = generate_population(GenConfig(3000, 3000, seed=11))
    genders = [u.gender for u in pop.users()]
    counts = [genders.count(g) for g in Gender]
    assert stats.chisquare(counts).pvalue > 0.001
    ranges = [d.vh_range for d in pop.drivers]
    assert stats.chisquare([ranges.count(v) for v in VehicleRange]).pvalue > 0.001
    weights = np.array([x for w in pop.weights.values() for x in w.values.values()])
    assert stats.chisquare(np.bincount(weights, minlength=11)).pvalue > 0.001


def test_clustered_preset_is_more_concentrated():
    def top_share(skew):
        pop = generate_population(GenConfig(2000, 10, seed=3, skew=skew, n_clusters=1, cluster_strength=0.9))
        pets = [d.pets for d in pop.drivers]
        return max(pets.count(True), pets.count(False)) / len(pets)
    assert top_share("uniform") < 0.55
    assert top_share("clustered") > 0.9


def test_config_validation():
    for bad in (dict(n_drivers=0), dict(skew="zipf"), dict(age_range=(10, 50)), dict(tolerance_range=(0, 5)),
                dict(seed=-1), dict(cluster_strength=1.5)):
        kw = dict(n_drivers=2, n_passengers=2)
        kw.update(bad)
        with pytest.raises(ConfigError):
            GenConfig(**kw)


def test_write_population_manifest(tmp_path):
    paths = write_population(GenConfig(4, 5, seed=9), tmp_path)
    manifest = json.loads(paths["manifest"].read_text())
    assert manifest["generator"] == "numpy.random.PCG64"
    assert manifest["seed"] == 9
    for name, digest in manifest["sha256"].items():
        assert hashlib.sha256((tmp_path / f"{name}.csv").read_bytes()).hexdigest() == digest
    pop = read_tables(tmp_path)
    assert len(pop.drivers) == 4 and len(pop.passengers) == 5


def test_schema_errors_carry_coordinates(tmp_path):
    write_tables(generate_population(GenConfig(3, 3, seed=2)), tmp_path)
    path = tmp_path / "DriverProfile.csv"
    lines = path.read_text().splitlines()
    cells = lines[2].split(",")
    cells[2] = "seventeen"
    lines[2] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TableError) as err:
        read_tables(tmp_path)
    assert (err.value.table, err.value.row, err.value.column) == ("DriverProfile", 3, "age")
    (tmp_path / "PassengerWeight.csv").unlink()
    with pytest.raises(ValueError):
        read_tables(tmp_path)


def test_derived_instance_is_complete_and_sorted_by_closeness():
    pop = generate_population(GenConfig(7, 5, seed=4))
    profiles, values = derive_matching_instance(pop)
    assert profiles.is_complete
    d_side, p_side = closeness_tables(pop)
    for i, d in enumerate(profiles.drivers):
        scores = [d_side[i, profiles.passengers.index(p)] for p in profiles.driver_lists[d]]
        assert scores == sorted(scores, reverse=True)
    np.testing.assert_allclose(values.values, d_side + p_side.T)
