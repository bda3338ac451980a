"""Stochastic matching with timeouts under the query-commit model."""

from ._jit import backend_name
from .bipartite import (
    AlgoChoice,
    bip_hybrid_ratio,
    choose_hybrid,
    choose_main,
    g_factor,
    main_worst_case_ratio,
    run_alg1,
    run_alg2,
    run_greedy,
    sample_probe_time,
)
from .general import general_ratio_function, h_factor, run_general, run_general_hybrid, split_vertices
from .harness import Estimate, build_policy, estimate_edge_probe_probabilities, monte_carlo, run_benchmark
from .instance import Edge, GeneratorParams, Instance, generate, load, parse, save, serialize, validate
from .lp import solve_lp, solve_lp_bip, solve_lp_gen, solve_lp_onl, split_large_small
from .online import (
    OnlineConfig,
    compute_dumping_factors,
    estimate_beta,
    online_greedy,
    online_ratio_function,
    required_sample_size,
    run_online,
)
from .oracle import exact_alg2_value, max_weight_matching, optimal_policy_value
from .rounding import gkps_round, levelset_round

__version__ = "0.1.0"
