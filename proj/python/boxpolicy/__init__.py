"""Interpretable box-union treatment policies fitted by branch and price."""

from ._core import (
    BudgetError,
    DataError,
    Dataset,
    FitConfig,
    FitResult,
    Hyperbox,
    NodeRecord,
    Policy,
    PreconditionError,
    ScoreVector,
    compute_scores,
    empirical_objective,
    exhaustive_objective,
    fit,
    load_csv,
    load_policy,
    parse_csv,
    policy_json,
    policy_value,
    rademacher_bound,
    regret,
    render_dot,
    render_text,
    scores_from_values,
    simulate,
)

__all__ = [
    "BudgetError",
    "DataError",
    "Dataset",
    "FitConfig",
    "FitResult",
    "Hyperbox",
    "NodeRecord",
    "Policy",
    "PreconditionError",
    "ScoreVector",
    "compute_scores",
    "empirical_objective",
    "exhaustive_objective",
    "fit",
    "fit_policy",
    "load_csv",
    "load_policy",
    "parse_csv",
    "policy_json",
    "policy_value",
    "rademacher_bound",
    "regret",
    "render_dot",
    "render_text",
    "scores_from_values",
    "simulate",
]


def fit_policy(dataset, max_boxes, method="dr", nuisance="kernel+logistic", scale_psi=False, **options):
    """Score `dataset` and fit a policy with at most `max_boxes` boxes.

    Extra keyword arguments set the matching FitConfig fields, for example
    ``omega``, ``flip``, ``max_nodes`` or ``time_limit``.
    """
    config = FitConfig()
    config.m_max = max_boxes
    for name, value in options.items():
        if not hasattr(config, name):
            raise TypeError(f"unknown fit option {name!r}")
        setattr(config, name, value)
    scores = compute_scores(dataset, method, nuisance, scale_psi)
    return fit(dataset, scores, config)
