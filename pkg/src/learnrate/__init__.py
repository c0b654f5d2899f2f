"""Convergence speed of two learning algorithms.

Spectral analysis of the memoryless learner, closed forms and simulation
for learning with full memory, and Monte Carlo tools for the harmonic mean
of heavy-tailed gap samples that controls both.
"""
__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    LearnerInstance,
    OverlapDistribution,
    instance_from_gaps,
    instance_from_overlaps,
    make_distribution,
    make_instance,
    sample_gaps,
)
from .spectral import (  # noqa: E402
    build_transition_matrix,
    eigen_constant_C,
    harmonic_mean,
    second_eigenvalue,
    smallest_derivative_root,
    summarize,
)

__all__ = [
    "LearnerInstance",
    "OverlapDistribution",
    "build_transition_matrix",
    "eigen_constant_C",
    "harmonic_mean",
    "instance_from_gaps",
    "instance_from_overlaps",
    "make_distribution",
    "make_instance",
    "sample_gaps",
    "second_eigenvalue",
    "smallest_derivative_root",
    "summarize",
]
