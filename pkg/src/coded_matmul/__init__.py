"""Straggler-tolerant distributed matrix multiplication with array codes.

Exact encoders and decoders for array codes, polynomial codes and MatDot
codes, a latency model with closed forms and Monte Carlo simulation, and a
communication cost model.
"""

from .arraycode import (
    ArrayCode,
    AsymArrayCode,
    CodeNotFound,
    build_asym_code,
    builtin_5222,
    decode_nodes,
    decode_product,
    encode_tasks,
    max_blocklength,
    max_blocklength_asym,
    recovery_threshold,
    search_code,
    systematic_code,
    validate_mds,
    validate_sampled,
)
from .baselines import InsufficientResults, MatDotSpec, PolyCodeSpec, matdot_decode, matdot_encode, poly_decode, poly_encode
from .comm import CommCost, comm_symbols, normalized_overhead_asym
from .experiments import Scenario, parse_config, run_preset, run_scenario, selftest
from .latency import LatencyParams, closed_form_phases, expected_T, harmonic, table1_params
from .linalg import DEFAULT_PRIME, DenseMatrix, assemble, matmul_oracle, partition, random_matrix
from .peeling import PeelResult, peel_decode
from .simulate import SimOutcome, mc_simulate

__version__ = "0.1.0"
