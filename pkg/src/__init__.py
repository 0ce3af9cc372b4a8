"""wishart-lab - eigenvalue statistics of rank-1 non-central complex Wishart matrices."""

__version__ = "1.0.0"
