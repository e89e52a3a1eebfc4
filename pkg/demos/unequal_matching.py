"""Stable matching when drivers outnumber passengers, and what stability costs.

Three passengers and six drivers rate each other by closeness coefficient.
Preference lists follow from the closeness values; the smaller side proposes.
The exact optimum assignment shows the price paid for stability.
"""
from ridematch import (
    driver_optimal, find_blocking_pairs, fixture_path, instance_from_closeness, max_weight_assignment,
    metric_report, sm_match,
)
from ridematch.assignment import closeness_from_csv

pc = closeness_from_csv(fixture_path("closeness_passengers.csv").read_text())
dc = closeness_from_csv(fixture_path("closeness_drivers.csv").read_text())
profiles, values = instance_from_closeness(pc, dc)

for p in profiles.passengers:
    print(f"{p} prefers", " > ".join(profiles.passenger_lists[p]))

stable = sm_match(profiles)
print("\nstable matching (passengers propose):", sorted(stable.pairs))
print("unmatched drivers:", sorted(stable.unmatched_drivers))
print("blocking pairs:", find_blocking_pairs(profiles, stable))
print("driver-proposing result:", sorted(driver_optimal(profiles).pairs), "(unique stable matching)")

optimum, total = max_weight_assignment(values)
print(f"\noptimal assignment {sorted(optimum.pairs)} with total value {total:.2f}")
print(f"stable matching total value {values.total(stable):.2f}")
report = metric_report(profiles, stable, values)
print(f"price of stability {report.price_of_stability:.4f}")
print(f"regret {report.regret_cost}, egalitarian {report.egalitarian_cost}, sex-equality {report.sex_equality_cost}")
