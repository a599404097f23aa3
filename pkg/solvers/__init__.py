"""
Equilibrium solvers for discrete auction games.
"""


class SolverInvariantError(RuntimeError):
    """A solver produced a result that contradicts a structural guarantee."""
