"""A small seeded size sweep: how matching costs grow with the population."""
from collections import defaultdict
from statistics import mean

from ridematch.bench import ExperimentPlan, run_bench

plan = ExperimentPlan(sizes=[(n, n) for n in (5, 10, 25, 50)] + [(50, 10), (10, 50)],
                      trials=10, algorithms=("sm", "gs"), seed=1)
rows, _ = run_bench(plan)

cells = defaultdict(list)
for r in rows:
    cells[(r["n_drivers"], r["n_passengers"], r["algorithm"])].append(r)

print(f"{'drivers':>7} {'pass.':>5} {'alg':>3} {'regret':>7} {'egal/n':>7} {'sexeq/n':>7} {'delta':>6}")
for (n_d, n_p, alg), rs in cells.items():
    print(f"{n_d:>7} {n_p:>5} {alg:>3} {mean(r['regret'] for r in rs):>7.1f} "
          f"{mean(r['egalitarian_norm'] for r in rs):>7.2f} {mean(r['sex_equality_norm'] for r in rs):>7.2f} "
          f"{mean(float(r['delta']) for r in rs):>6.3f}")
