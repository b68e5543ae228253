"""Cut-and-count solvers for connected vertex cover and connected dominating
set on graphs given by clique-width expressions."""

__version__ = "0.1.0"
