"""Escape rates of the greedy beta-transformation through the switch hole
``(1/beta, 1/(beta(beta-1)))`` and the dimension of the univoque set.

Two routes are provided. The matrix route builds a Markov partition from
the hole-endpoint orbits and reads the survivor entropy off a Perron root.
The survivor route iterates exact interval measures. They agree whenever
both apply.
"""
from .beta_core import (
    BetaParam,
    BetaSpecError,
    DigitWord,
    HoleGeometry,
    greedy_coding,
    greedy_step,
    hole,
    lazy_step,
    make_beta,
    project,
    stuck_step,
    univoque_test,
)
from .constants import golden_ratio, komornik_loreti, multinacci, named_constant, thue_morse
from .markov_escape import (
    AnalysisConfig,
    AnalysisReport,
    Bracket,
    MarkovConstructionError,
    PerronConvergenceError,
    TransitionMatrix,
    UndeterminedError,
    approx_bracket,
    build_partition,
    build_transition,
    decide_escape,
    detect_matching,
    escape_from_matrix,
    markov_closure,
    orbit_until_hole,
    perron_root,
    verify_markov,
)
from .sft_tools import (
    Block,
    build_transfer,
    complement,
    count_words,
    escape_for_admissible,
    sft_entropy,
    window_allowed,
)
from .survivor import IntervalSet, escape_rate_empirical, preimage, survivor_iterate

__version__ = "0.1.0"
