"""ebrpca package.

Robust PCA by empirical Bayes. The package follows a clean architecture
layout: domain (models, solvers, generators, metrics), application
(experiment runner), interfaces, infrastructure (solver adapters, result
files), shared and cli.
"""

__version__ = "0.1.0"

__all__ = ["cli", "domain", "application", "interfaces", "infrastructure", "shared"]
