"""Decide primitive integer solutions of x^2 + B y^2 = C z^n for odd n >= 3."""
from .arith import Instance, check_point, factorize, genus_info, kronecker, squarefree_split
from .cascade import Status, Verdict, decide
from .local import everywhere_locally_solvable, local_solvable_at

__all__ = [
    "Instance", "check_point", "factorize", "genus_info", "kronecker", "squarefree_split",
    "Status", "Verdict", "decide", "everywhere_locally_solvable", "local_solvable_at",
]
__version__ = "0.1.0"
