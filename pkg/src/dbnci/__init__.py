"""Conditional-independence model checking for dynamic Bayesian networks.

Structural questions (d-separation in every time slice of a DBN-template)
are decided exactly through a finite representative transition system;
stochastic questions on concrete DBNs are answered on bounded prefixes.
"""

from .dsep import d_separated
from .ltl import check_ltl, eval_lasso, parse_ltl
from .model import (DBN, CIProposition, DBNTemplate, ModelError, load_model, parse_dbn,
                    parse_proposition)
from .nba import NBA, accepts_lasso, check_nba
from .repr_ts import find_lasso, restricted_trace
from .stochastic import bounded_check, distribution_at, stochastic_ci

__version__ = "0.1.0"
