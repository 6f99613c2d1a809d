"""Rotated encoding of CNF into projectors and frustration-free Hamiltonians.

TRUE maps to |theta> = R_Y(+theta)|+> and FALSE to |theta_bar> = R_Y(-theta)|+>
for a rotation angle theta in (0, pi/2]; at theta = pi/2 this is the standard
computational-basis encoding.  Each clause becomes a rank-1 projector onto the
product of perpendicular states at its support: a positive literal contributes
|theta_perp>, a negative literal |theta_bar_perp>.  This rule reproduces, at
theta = pi/2, the projector onto the clause's unique forbidden basis pattern.

All amplitudes are real; states are stored exactly as produced by the R_Y
formula with no re-phasing (|theta_perp> equals -|0> at theta = pi/2, which is
irrelevant to the projectors).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .config import DENSE_CAP, STATE_CAP, check_cap
from .formula import Clause, Formula, solution_indices


class Unsatisfiable(ValueError):
    """Raised when an operation requires a satisfiable formula."""


def check_angle(theta: float) -> float:
    if not 0.0 < theta <= np.pi / 2:
        raise ValueError(f"rotation angle must lie in (0, pi/2], got {theta}")
    return float(theta)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


_PLUS = np.array([1.0, 1.0]) / np.sqrt(2.0)


def single_qubit_states(theta: float):
    """(|theta>, |theta_bar>, |theta_perp>, |theta_bar_perp>).

    Pairwise overlaps: <theta|theta_perp> = <theta_bar|theta_bar_perp> = 0,
    <theta|theta_bar> = <theta_perp|theta_bar_perp> = cos(theta),
    <theta|theta_bar_perp> = <theta_bar|theta_perp> = sin(theta).
    """
    check_angle(theta)
    return (
        ry(theta) @ _PLUS,
        ry(-theta) @ _PLUS,
        ry(np.pi + theta) @ _PLUS,
        ry(np.pi - theta) @ _PLUS,
    )


@dataclass(frozen=True, eq=False)
class ClauseProjector:
    """Rank-1 projector |u><u| on ``support`` tensored with identity.

    ``compat`` is the clause's length-n compatibility string over {0,1,I}:
    the forbidden assignment bit at each support position ('0' for a positive
    literal, '1' for a negative one) and 'I' elsewhere.  Two projectors
    commute iff their compatibility strings are compatible.
    """

    n: int
    support: tuple[int, ...]  # 1-based qubit indices, strictly increasing
    factors: tuple[np.ndarray, ...]  # one unit 2-vector per support qubit
    compat: str

    @property
    def width(self) -> int:
        return len(self.support)


def clause_projector(clause: Clause, theta: float, n: int) -> ClauseProjector:
    _, _, perp, bar_perp = single_qubit_states(theta)
    support = []
    factors = []
    compat = ["I"] * n
    for lit in clause.literals:
        if lit.var > n:
            raise ValueError(f"literal variable {lit.var} beyond n={n}")
        support.append(lit.var)
        factors.append(bar_perp if lit.negated else perp)
        compat[lit.var - 1] = "1" if lit.negated else "0"
    return ClauseProjector(
        n=n, support=tuple(support), factors=tuple(factors), compat="".join(compat)
    )


def clause_projectors(f: Formula, theta: float) -> tuple[ClauseProjector, ...]:
    return tuple(clause_projector(c, theta, f.n) for c in f.clauses)


def theta_string_state(assignment: str, theta: float, cap: int = STATE_CAP) -> np.ndarray:
    """Rotated product state encoding ``assignment``; length 2^n, unit norm."""
    check_angle(theta)
    n = len(assignment)
    check_cap(n, cap, "rotated product state")
    up, down = ry(theta) @ _PLUS, ry(-theta) @ _PLUS
    state = np.array([1.0])
    for bit in assignment:
        state = np.kron(state, up if bit == "1" else down)
    return state


def dense_projector(proj: ClauseProjector, cap: int = DENSE_CAP) -> np.ndarray:
    """Materialize the 2^n x 2^n matrix of a clause projector."""
    check_cap(proj.n, cap, "dense projector")
    factor_at = dict(zip(proj.support, proj.factors))
    eye = np.eye(2)
    blocks = [
        np.outer(factor_at[q], factor_at[q]) if q in factor_at else eye
        for q in range(1, proj.n + 1)
    ]
    return reduce(np.kron, blocks, np.array([[1.0]]))


def hamiltonian_matrix(f: Formula, theta: float, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense H(theta) = sum of clause projectors; symmetric PSD; its kernel is
    spanned by the rotated solution states."""
    check_cap(f.n, cap, "dense Hamiltonian")
    check_angle(theta)
    dim = 1 << f.n
    h = np.zeros((dim, dim))
    for c in f.clauses:
        h += dense_projector(clause_projector(c, theta, f.n), cap)
    return h


def ground_space_projector(f: Formula, theta: float, cap: int = DENSE_CAP) -> np.ndarray:
    """Orthogonal projector onto span of the rotated solution states.

    Rank equals the number of satisfying assignments (the rotation preserves
    the ground-space dimension for theta in (0, pi/2])."""
    check_cap(f.n, cap, "ground-space projector")
    check_angle(theta)
    sols = solution_indices(f)
    if sols.size == 0:
        raise Unsatisfiable("formula has no satisfying assignment")
    cols = np.column_stack(
        [theta_string_state(format(int(s), f"0{f.n}b"), theta) for s in sols]
    )
    q, _ = np.linalg.qr(cols)
    return q @ q.T
