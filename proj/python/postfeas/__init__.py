"""Bayesian linear programs with posterior feasibility certificates.

Problems, models and configs are plain dicts using the same JSON layout as
the ``postfeas`` command-line tool.
"""

import json

from . import _postfeas
from ._postfeas import (
    DomainError,
    Error,
    PanelInfeasible,
    ParseError,
    beta_quantile,
    binomial_tail,
    bonferroni_kappa,
    chi2_cdf,
    chi2_quantile,
    clopper_pearson_upper,
    reg_inc_beta,
    required_sample_size,
    student_t_cdf,
    student_t_quantile,
    violation_bound,
)

__version__ = _postfeas.__version__


def solve_lp(problem):
    """Solve ``{"maximize", "constraints", "bounds"}``; returns status, objective and x."""
    return json.loads(_postfeas.solve_lp(json.dumps(problem)))


def robustify(problem, alpha=0.05):
    """Ellipsoidal robust counterpart of an LP with ``uncertain_rows``, solved by cutting planes."""
    return json.loads(_postfeas.robustify(json.dumps(problem), alpha))


def certify(x, model, m=5000, beta=0.05, seed=42):
    """Monte Carlo violation certificate of ``x`` under a posterior model dict."""
    return json.loads(_postfeas.certify(list(x), json.dumps(model), m, beta, seed))


def certify_replay(s, m, beta=0.05):
    """Certificate from a known count of ``s`` violating draws out of ``m``."""
    return json.loads(_postfeas.certify_replay(s, m, beta))


def run_benchmark(config=None, jobs=1):
    """Simulation benchmark; returns the by_alpha, overall and trials tables as CSV text."""
    return _postfeas.run_benchmark(json.dumps(config or {}), jobs)


def panel(detections, clusters, weights, config=None):
    """Gene panel selection from CSV paths; raises PanelInfeasible if no panel can reach L."""
    out = _postfeas.panel(str(detections), str(clusters), str(weights), json.dumps(config or {}))
    out["certificate"] = json.loads(out["certificate"])
    return out
