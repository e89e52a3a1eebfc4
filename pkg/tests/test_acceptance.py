"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are written to the
terminal even when output is captured) or directly with
``python3 tests/test_acceptance.py``. Criteria that the reference material
cannot satisfy are still checked as stated and are expected to FAIL; see the
README for the analysis.
"""
import filecmp
import json
import sys
import tempfile
import time
from pathlib import Path
from statistics import mean

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent))

from conftest import load_json, load_profiles, oracle_max_assignment, random_profiles  # noqa: E402
from ridematch import (  # noqa: E402
    Matching, ValueMatrix, brute_force_stable, driver_optimal, find_blocking_pairs, fixture_path,
    gale_shapley, instance_from_closeness, max_weight_assignment, passenger_optimal, price_of_stability,
    sm_match, topsis_rank,
)
from ridematch.assignment import closeness_from_csv  # noqa: E402
from ridematch.bench import ExperimentPlan, run_bench  # noqa: E402
from ridematch.cli import main as cli_main  # noqa: E402
from ridematch.tables import read_user_fixture  # noqa: E402

EQUAL_SIZES = [5, 10, 25, 50, 100, 250, 500]
FIXED_SIDE = 250
VARYING_SIDE = [5, 50, 100, 175, 250, 325, 400, 500]
TRIALS = 30


def _pairs(*pairs):
    return frozenset(pairs)


def _trunc2(x):
    return float(np.floor(x * 100 + 1e-9) / 100)


# -- criterion checks: each returns (ok, detail) -------------------------------

def check_1():
    start = time.perf_counter()
    matrix, _ = read_user_fixture(fixture_path("p1_profiles.json").read_text())
    elapsed = time.perf_counter() - start
    printed = load_json("p1_judgment_matrix.json")
    cols = printed["criteria"]
    mismatches = []
    for crit in ("gender", "status", "vhrange", "pets", "music", "smoking"):
        want = [row[cols.index(crit)] for row in printed["entries"]]
        if list(matrix.column(crit)) != want:
            mismatches.append(crit)
    ages = [_trunc2(a) for a in matrix.column("age")]
    if ages != [0.55, 0.26, 0.55, 0.12, 0.38, 0.2]:
        mismatches.append(f"age {ages}")
    ok = not mismatches and elapsed < 1.0
    return ok, f"binary+age entries {'match' if not mismatches else mismatches}; {elapsed * 1000:.1f} ms"


def check_2():
    matrix, w = read_user_fixture(fixture_path("p1_judgment_matrix.json").read_text())
    got = topsis_rank(matrix, w)[0].preference_list
    want = ("D5", "D3", "D4", "D1", "D2", "D6")
    return got == want, f"PL(P1) = {','.join(got)}"


def check_3():
    smp = load_profiles("smp_4.json")
    gs = gale_shapley(smp).pairs
    ok_gs = gs == _pairs(("m1", "w4"), ("m2", "w3"), ("m3", "w2"), ("m4", "w1"))
    ident = Matching.from_pairs([("m1", "w1"), ("m2", "w2"), ("m3", "w3"), ("m4", "w4")], smp.drivers, smp.passengers)
    ok_ident = ("m1", "w4") in {(b.driver_id, b.passenger_id) for b in find_blocking_pairs(smp, ident)}
    six = Matching.from_pairs([("m1", "w1"), ("m2", "w2"), ("m3", "w4"), ("m4", "w3")], smp.drivers, smp.passengers)
    got_six = {(b.driver_id, b.passenger_id) for b in find_blocking_pairs(smp, six)}
    ok_six = got_six == {("m1", "w2"), ("m1", "w4"), ("m2", "w1"), ("m2", "w4"), ("m3", "w2"), ("m4", "w4")}
    return ok_gs and ok_ident and ok_six, f"GS ok={ok_gs}, (m1,w4) blocks={ok_ident}, six pairs={ok_six}"


def check_4():
    inst = load_profiles("instance_3x6.json")
    want_d = _pairs(("D2", "P1"), ("D1", "P2"), ("D3", "P3"))
    want_p = _pairs(("D2", "P1"), ("D3", "P2"), ("D6", "P3"))
    d, p, s = driver_optimal(inst).pairs, passenger_optimal(inst).pairs, sm_match(inst).pairs
    blockers = find_blocking_pairs(inst, Matching.from_pairs(want_d, inst.drivers, inst.passengers))
    detail = (f"driver_optimal {'matches' if d == want_d else 'differs: ' + str(sorted(d))}; "
              f"passenger_optimal={'ok' if p == want_p else 'differs'}; sm={'ok' if s == want_p else 'differs'}; "
              f"expected driver-optimal has blocking pairs "
              f"{[(b.driver_id, b.passenger_id) for b in blockers]}")
    return d == want_d and p == want_p and s == want_p, detail


def check_5():
    pc = closeness_from_csv(fixture_path("closeness_passengers.csv").read_text())
    dc = closeness_from_csv(fixture_path("closeness_drivers.csv").read_text())
    profiles, values = instance_from_closeness(pc, dc)
    _, total = max_weight_assignment(values)
    delta = price_of_stability(values, sm_match(profiles))
    ok = abs(total - 4.3) <= 1e-9 and abs(delta - 0.1209) <= 1e-3
    return ok, f"objective={total!r}, delta={delta:.5f}"


def _rank(lst, x):
    return lst.index(x) if x is not None else len(lst)


def check_6():
    rng = np.random.default_rng(20240606)
    failures = []
    for k in range(500):
        n_d, n_p = (int(x) for x in rng.integers(1, 7, size=2))
        profiles = random_profiles(rng, n_d, n_p)
        m = sm_match(profiles)
        stable = brute_force_stable(profiles)
        if m not in stable:
            failures.append((k, "sm not stable"))
            continue
        if n_p < n_d:
            side, lists, partner = profiles.passengers, profiles.passenger_lists, "passenger_partner"
        else:
            side, lists, partner = profiles.drivers, profiles.driver_lists, "driver_partner"
        for other in stable:
            if any(_rank(lists[a], getattr(m, partner).get(a)) > _rank(lists[a], getattr(other, partner).get(a))
                   for a in side):
                failures.append((k, "not proposer-optimal"))
                break
        values = ValueMatrix(profiles.drivers, profiles.passengers, rng.uniform(0, 2, size=(n_d, n_p)))
        if abs(max_weight_assignment(values)[1] - oracle_max_assignment(values)) > 1e-9:
            failures.append((k, "assignment differs from enumeration"))
    return not failures, f"500 instances, {len(failures)} failures {failures[:3]}"


def check_7():
    rng = np.random.default_rng(777)
    failures = 0
    runs = 0
    for _ in range(1000):
        n_d, n_p = (int(x) for x in rng.integers(1, 51, size=2))
        profiles = random_profiles(rng, n_d, n_p)
        algs = [sm_match, driver_optimal, passenger_optimal] + ([gale_shapley] if n_d == n_p else [])
        for alg in algs:
            runs += 1
            m = alg(profiles)
            unmatched = len(m.unmatched_drivers) + len(m.unmatched_passengers)
            if find_blocking_pairs(profiles, m) or unmatched != abs(n_d - n_p):
                failures += 1
    return failures == 0, f"1000 instances, {runs} algorithm runs, {failures} failures"


def check_8():
    rng = np.random.default_rng(88)
    worst_scale = worst_zero = 0.0
    for _ in range(200):
        m, n = (int(x) for x in rng.integers(2, 12, size=2))
        x = rng.uniform(0, 10, size=(m, n))
        w = rng.integers(0, 11, size=n).astype(float)
        base = topsis_rank(x, w)[1].closeness
        scaled = x * rng.uniform(0.01, 100, size=n)
        worst_scale = max(worst_scale, float(np.abs(topsis_rank(scaled, w)[1].closeness - base).max()))
        col = int(rng.integers(n))
        w0 = w.copy()
        w0[col] = 0
        y = x.copy()
        y[:, col] = rng.uniform(0, 10, size=m)
        diff = topsis_rank(y, w0)[1].closeness - topsis_rank(x, w0)[1].closeness
        worst_zero = max(worst_zero, float(np.abs(diff).max()))
    ok = worst_scale <= 1e-12 and worst_zero <= 1e-12
    return ok, f"max |dC| scale={worst_scale:.2e}, zero-weight={worst_zero:.2e}"


def _means(rows, metric, algorithm):
    by = {}
    for r in rows:
        if r["algorithm"] == algorithm:
            by.setdefault((r["n_drivers"], r["n_passengers"]), []).append(float(r[metric]))
    return {k: mean(v) for k, v in by.items()}


_bench_cache = {}


def _bench():
    if not _bench_cache:
        start = time.perf_counter()
        equal, _ = run_bench(ExperimentPlan(sizes=[(n, n) for n in EQUAL_SIZES], trials=TRIALS, seed=9))
        fixed_d, _ = run_bench(ExperimentPlan(sizes=[(FIXED_SIDE, n) for n in VARYING_SIDE], trials=TRIALS,
                                              algorithms=("sm",), seed=10))
        fixed_p, _ = run_bench(ExperimentPlan(sizes=[(n, FIXED_SIDE) for n in VARYING_SIDE], trials=TRIALS,
                                              algorithms=("sm",), seed=11))
        _bench_cache.update(equal=equal, fixed_d=fixed_d, fixed_p=fixed_p, seconds=time.perf_counter() - start)
    return _bench_cache


def check_9a():
    b = _bench()
    parts, ok = [], True
    for alg in ("sm", "gs"):
        for metric in ("regret", "egalitarian", "egalitarian_norm"):
            series = [v for _, v in sorted(_means(b["equal"], metric, alg).items())]
            mono = all(y >= x for x, y in zip(series, series[1:]))
            ok &= mono
            parts.append(f"{alg}/{metric} {'non-decreasing' if mono else 'NOT monotone'}")
    return ok, "; ".join(parts)


def check_9b():
    b = _bench()
    parts, ok = [], True
    for alg in ("sm", "gs"):
        means = _means(b["equal"], "sex_equality_norm", alg)
        sizes = sorted(means)
        rho = stats.spearmanr([s[0] for s in sizes], [means[s] for s in sizes]).statistic
        ok &= abs(rho) < 0.3
        parts.append(f"{alg} rho={rho:+.2f} (series {', '.join(f'{means[s]:.2f}' for s in sizes)})")
    return ok, "; ".join(parts)


def check_9c():
    b = _bench()
    parts, ok = [], True
    for label, rows, vary in (("drivers fixed", b["fixed_d"], 1), ("passengers fixed", b["fixed_p"], 0)):
        means = _means(rows, "delta", "sm")
        peak = max(means, key=means.get)
        ok &= peak[vary] == FIXED_SIDE
        series = ", ".join(f"{k[vary]}:{v:.3f}" for k, v in sorted(means.items(), key=lambda kv: kv[0][vary]))
        parts.append(f"{label} at {FIXED_SIDE}: peak at {peak[vary]} ({series})")
    ok &= b["seconds"] < 600
    return ok, "; ".join(parts) + f"; bench runtime {b['seconds']:.0f} s"


def _run_all_commands(root: Path):
    pop = root / "pop"
    codes = [
        cli_main(["gen", "--drivers", "12", "--passengers", "9", "--seed", "123", "--skew", "clustered",
                  "--out", str(pop)]),
        cli_main(["rank", "--tables", str(pop), "--method", "topsis", "--method", "wsm", "--trace",
                  "--out", str(root / "rank")]),
        cli_main(["match", "--tables", str(pop), "--trace", "--out", str(root / "match")]),
        cli_main(["verify", "--profiles", str(fixture_path("instance_3x6.json")),
                  "--matching", str(fixture_path("instance_3x6_printed_driver_optimal.json")),
                  "--out", str(root / "verify")]),
        cli_main(["bench", "--sizes", "4,3x5,8", "--trials", "3", "--seed", "5", "--algorithms", "sm,gs,driver_opt",
                  "--out", str(root / "bench")]),
    ]
    return codes


def check_10():
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp) / "a", Path(tmp) / "b"
        codes_a, codes_b = _run_all_commands(a), _run_all_commands(b)
        files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        differing = [str(f) for f in files if not filecmp.cmp(a / f, b / f, shallow=False)]
        missing = sorted({p.relative_to(b) for p in b.rglob("*") if p.is_file()} ^ set(files))
    ok = codes_a == codes_b == [0, 0, 0, 5, 0] and not differing and not missing
    return ok, f"{len(files)} files compared, {len(differing)} differ, exit codes {codes_a}"


CRITERIA = [
    ("1", "judgment matrix golden", check_1),
    ("2", "TOPSIS golden", check_2),
    ("3", "SMP golden", check_3),
    ("4", "unequal-sets golden", check_4),
    ("5", "assignment golden", check_5),
    ("6", "oracle equivalence", check_6),
    ("7", "stability property", check_7),
    ("8", "TOPSIS invariance", check_8),
    ("9a", "cost trends rise with size", check_9a),
    ("9b", "sex-equality flat in size", check_9b),
    ("9c", "price of stability peaks at equal size", check_9c),
    ("10", "determinism", check_10),
]


def _line(cid, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {cid} ({name}): {detail}"


@pytest.mark.parametrize("cid,name,check", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(cid, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(cid, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for cid, name, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(cid, name, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria passed")
