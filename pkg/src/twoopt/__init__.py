"""Exact and threshold-pruned search for the best 2-OPT move on symmetric TSP tours."""
from .instance import (CminTable, Instance, InstanceKind, InvalidInstanceError, TsplibParseError,
                       cmin_table, cost, from_matrix, from_points, gen_euclidean, gen_uniform,
                       parse_tsplib, read_tsplib)
from .localsearch import (ConvergenceTrace, HybridConfig, is_local_optimum, run_ce_localsearch,
                          run_hybrid_localsearch)
from .search import (BestMoveResult, Move, SearchStats, SearchVariant, best_move_blind,
                     best_move_ce, best_move_fixed_threshold, best_move_greedy, delta_euclidean,
                     delta_uniform)
from .tour import Tour, apply_move, move_gain, random_tour, tour_length

__version__ = "0.1.0"
