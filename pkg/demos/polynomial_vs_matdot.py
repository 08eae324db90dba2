"""
How many workers must answer?
=============================

Polynomial codes wait for m^2 workers and each returns a small block.
MatDot waits for only 2m - 1, but every answer is a full-size product.
"""

# %%
import itertools

from coded_matmul.baselines import (
    InsufficientResults,
    MatDotSpec,
    PolyCodeSpec,
    matdot_decode,
    matdot_encode,
    poly_decode,
    poly_encode,
    poly_layout,
)
from coded_matmul.linalg import DEFAULT_PRIME, assemble, matmul_oracle, random_matrix

A = random_matrix(4, 4, DEFAULT_PRIME, 7)
B = random_matrix(4, 4, DEFAULT_PRIME, 8)
truth = matmul_oracle(A, B)

# %%
# Polynomial code, m = 2 over ten workers
# ---------------------------------------

poly = PolyCodeSpec(m=2, workers=10)
results = [(t.point, t.compute()) for t in poly_encode(A, B, poly)]
for size in (3, 4):
    ok = 0
    for subset in itertools.combinations(results, size):
        try:
            ok += assemble(poly_decode(subset, poly), poly_layout(A, B, poly)) == truth
        except InsufficientResults:
            pass
    print(f"poly: {ok} of the {size}-worker subsets decode")
print("block returned per worker:", results[0][1].shape)

# %%
# MatDot, m = 2 over five workers
# -------------------------------

matdot = MatDotSpec(m=2, workers=5)
results = [(t.point, t.compute()) for t in matdot_encode(A, B, matdot)]
for size in (2, 3):
    ok = 0
    for subset in itertools.combinations(results, size):
        try:
            ok += matdot_decode(subset, matdot) == truth
        except InsufficientResults:
            pass
    print(f"matdot: {ok} of the {size}-worker subsets decode")
print("block returned per worker:", results[0][1].shape)
