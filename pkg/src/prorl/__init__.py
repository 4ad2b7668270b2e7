"""Primal-dual offline RL on tabular MDPs with single-policy concentrability.

Modules
-------
mdp           tabular models, policies, occupancies, exact solvers
regularizers  density-ratio regularizers f and their constants
objective     population / empirical Lagrangian and Bellman residuals
oracle        exact regularized and unregularized solutions, diagnostics
classes       finite value / weight / policy classes and witnesses
saddle        max-min estimation over finite classes
extraction    policy extraction and behavior-cloning extraction
bounds        closed-form statistical error and performance-gap bounds
datasets      offline transition datasets and their serialization
pipelines     end-to-end experiment runs
suites        named experiment suites with CSV/SVG artifacts
cli           `pro-rl` command-line entry point
"""

__version__ = "0.1.0"
