"""
Five nodes, two stragglers
==========================

Walk one product through the [5,2,2,2] array code: split it into four dot
products, hand each node two XOR-style sums, lose any three nodes and peel
the answer back out of the two that finished.
"""

# %%
# The code
# --------
# Each node runs two processors; each processor adds up one or two of the
# four source products.

from coded_matmul import catalog
from coded_matmul.arraycode import builtin_5222, decode_nodes, encode_tasks, recovery_threshold
from coded_matmul.baselines import uncoded_plan
from coded_matmul.linalg import DEFAULT_PRIME, assemble, matmul_oracle, random_matrix

code = builtin_5222()
print(catalog.dumps(code))

# %%
# Encode
# ------
# A and B are 8x2 over Z_q, so A^T B has four entries, one per source.

A = random_matrix(8, 2, DEFAULT_PRIME, 1)
B = random_matrix(8, 2, DEFAULT_PRIME, 2)
plan, tasks = uncoded_plan(A, B)
cluster = encode_tasks(code, tasks)
print("dot products per node:", cluster.node_work)

# %%
# Straggle and peel
# -----------------
# Nodes 1 and 3 finish first.  The peeling trace lists which cell solved
# which source, in order.

alive = [1, 3]
outputs = cluster.execute(A, B, alive)
result = decode_nodes(code, outputs, alive)
for eq, src in result.trace:
    node, proc = divmod(eq, code.b)
    print(f"cell ({alive[node]}, {proc}) -> source {src}")
print("subtractions:", result.work)
assert assemble(result.values, plan) == matmul_oracle(A, B)

# %%
# Cells versus nodes
# ------------------
# Any two whole nodes suffice, but seven arbitrary cells are needed when
# finished cells are scattered across nodes.

print("recovery threshold in cells:", recovery_threshold(code))
