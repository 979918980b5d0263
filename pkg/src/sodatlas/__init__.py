"""sodatlas: exact-arithmetic toolkit for Picard lattices, K-theoretic
semi-orthogonal decompositions, mutation scripts, and equivariant invariants
of rational surfaces."""

__version__ = "0.1.0"
