"""segfit: maximum-likelihood segmentation of ordered regression data.

Finds breakpoints in ordered data by alternating MAP decoding of a
left-to-right constrained chain with per-segment maximum-likelihood fits
(the max-EM iteration), seeds the search with binary-segmentation or
fused-lasso candidate pools, selects the number of segments by BIC, and
tests the one-breakpoint hypothesis with score-based likelihood-ratio
approximations calibrated by permutation.
"""

__version__ = "0.1.0"

from .candidates import CandidatePool, bs_candidates, combination_search, fl_candidates
from .data import (Dataset, ResponseKind, Segmentation, load_csv,
                   segment_members, write_csv)
from .estimator import MaxEmSegmenter, SingleBreakpointTest
from .exceptions import (CandidatePoolError, DataError, EnumerationBudgetError,
                         FitError, SegfitError, SingularInformationError)
from .hmm import (ChainSpec, LatticeScores, forward_backward, map_decode,
                  max_forward_backward, viterbi_path)
from .lrtest import (H0Context, LrCurve, PermutationResult, exact_lr,
                     h0_context, lr_scan, permutation_test, theorem1_scan,
                     theorem2_tail)
from .maxem import SegmentedFit, evaluate_loglik, max_em, segmented_loglik
from .models import (EmissionModel, FitResult, LinearModel, LogisticModel,
                     MeanModel, PoissonModel, WeibullAftModel, get_model)
from .oracle import SegmentFitCache, brute_force
from .selection import SelectionReport, bic_value, select_k
from .sim import (MetricsReport, Scenario, evaluate, generate, list_presets,
                  load_preset, report_params, run_one, run_replicates)
from .tvprox import tv_denoise

__all__ = [
    "__version__",
    "CandidatePool", "bs_candidates", "combination_search", "fl_candidates",
    "Dataset", "ResponseKind", "Segmentation", "load_csv", "segment_members",
    "write_csv",
    "MaxEmSegmenter", "SingleBreakpointTest",
    "CandidatePoolError", "DataError", "EnumerationBudgetError", "FitError",
    "SegfitError", "SingularInformationError",
    "ChainSpec", "LatticeScores", "forward_backward", "map_decode",
    "max_forward_backward", "viterbi_path",
    "H0Context", "LrCurve", "PermutationResult", "exact_lr", "h0_context",
    "lr_scan", "permutation_test", "theorem1_scan", "theorem2_tail",
    "SegmentedFit", "evaluate_loglik", "max_em", "segmented_loglik",
    "EmissionModel", "FitResult", "LinearModel", "LogisticModel", "MeanModel",
    "PoissonModel", "WeibullAftModel", "get_model",
    "SegmentFitCache", "brute_force",
    "SelectionReport", "bic_value", "select_k",
    "MetricsReport", "Scenario", "evaluate", "generate", "list_presets",
    "load_preset", "report_params", "run_one", "run_replicates",
    "tv_denoise",
]
