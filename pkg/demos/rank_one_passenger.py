"""Rank six drivers for one passenger with TOPSIS and the weighted-sum baseline.

Uses the bundled six-driver worked example: the judgment matrix rows are the
drivers, the columns are the passenger's ten criteria.
"""
import numpy as np

from ridematch import fixture_path, topsis_rank, wsm_rank
from ridematch.tables import read_user_fixture

matrix, weights = read_user_fixture(fixture_path("p1_judgment_matrix.json").read_text())
print("criteria:", ", ".join(matrix.criteria))
print("weights: ", weights)

result, trace = topsis_rank(matrix, weights)
print("\nTOPSIS closeness (higher is better)")
for cid in result.preference_list:
    print(f"  {cid}: {result.scores[cid]:.4f}")
print("ideal      :", np.round(trace.positive_ideal, 3))
print("anti-ideal :", np.round(trace.negative_ideal, 3))

baseline = wsm_rank(matrix, weights)
print("\nTOPSIS order:", " > ".join(result.preference_list))
print("WSM order:   ", " > ".join(baseline.preference_list))
