"""Certified reachability analysis for continuous-time LTI systems
x' = Ax + Bu with saturated inputs u(t) in [-1, 1]^m.

Subpackages follow the pipeline: exact spectral data (``algnum``),
problem modelling (``model``), decomposition into controllable
single-input parts (``decomp``), sign analysis of c^T e^(At) b
(``exppoly``), certified support points of the reachable set
(``boundary``), polytope sandwich + membership (``approx``), exact
decision procedures and logic export (``exact``), hardness reductions
(``skolem``), a brute-force simulation oracle (``oracle``) and the CLI
(``cli``).
"""

from ._kernel import KERNEL_NAME

__all__ = ["KERNEL_NAME"]
__version__ = "0.1.0"
