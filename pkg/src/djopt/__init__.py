"""Variational analysis and second-order optimality checks for disjunctive
systems built from finite unions of convex polyhedra."""

__version__ = "0.1.0"
