"""Dense real state-vector engine.

States are plain float64 arrays of length 2^n with variable 1 on the most
significant bit, matching the assignment-string convention of
:mod:`mdsat.formula`.  Clause projectors are applied through their factorized
rank-1 structure; no 2^n x 2^n matrix is ever formed on this path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .config import DENSE_CAP, STATE_CAP, check_cap
from .encoding import ClauseProjector, clause_projectors, dense_projector
from .formula import Formula

_RENORM_DRIFT = 1e-9


def plus_state(n: int, cap: int = STATE_CAP) -> np.ndarray:
    check_cap(n, cap, "plus state")
    return np.full(1 << n, 2.0 ** (-n / 2))


def norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(psi))


def _contract_support(psi: np.ndarray, proj: ClauseProjector) -> np.ndarray:
    """<u|psi> contracted over the support; tensor over the other qubits."""
    w = psi.reshape((2,) * proj.n)
    # Contract highest axis first so earlier axis indices stay valid.
    for q, u in sorted(zip(proj.support, proj.factors), reverse=True):
        w = np.tensordot(u, w, axes=([0], [q - 1]))
    return w


def fail_weight(psi: np.ndarray, proj: ClauseProjector) -> float:
    """||P psi||^2 for the factorized rank-1 projector."""
    w = _contract_support(psi, proj)
    return float(np.sum(w * w))


def apply_projector(psi: np.ndarray, proj: ClauseProjector) -> np.ndarray:
    """P|psi> (unnormalized)."""
    w = _contract_support(psi, proj)
    full = w
    for u in reversed(proj.factors):
        full = np.multiply.outer(u, full)
    order = list(proj.support) + [
        q for q in range(1, proj.n + 1) if q not in proj.support
    ]
    full = np.transpose(full, axes=np.argsort(order))
    return full.reshape(-1)


def apply_check_unnormalized(psi: np.ndarray, proj: ClauseProjector) -> np.ndarray:
    """C|psi> = (I - P)|psi> (unnormalized)."""
    return psi - apply_projector(psi, proj)


def clause_check_probabilities(psi: np.ndarray, proj: ClauseProjector):
    """(p_fail, p_pass) of the clause check on a normalized state."""
    p_fail = min(fail_weight(psi, proj), 1.0)
    return p_fail, 1.0 - p_fail


def apply_pass(psi: np.ndarray, proj: ClauseProjector) -> np.ndarray:
    """Post-measurement state of the passed branch, renormalized."""
    out = apply_check_unnormalized(psi, proj)
    p_pass = float(np.dot(out, out))
    if p_pass <= 1e-15:
        raise ZeroDivisionError("pass branch has zero probability")
    if abs(p_pass - 1.0) > _RENORM_DRIFT:
        out = out / np.sqrt(p_pass)
    return out


def apply_fail(psi: np.ndarray, proj: ClauseProjector) -> np.ndarray:
    """Post-measurement state of the failed branch, renormalized."""
    out = apply_projector(psi, proj)
    p_fail = float(np.dot(out, out))
    if p_fail <= 1e-15:
        raise ZeroDivisionError("fail branch has zero probability")
    return out / np.sqrt(p_fail)


@dataclass(frozen=True)
class MeasurementOutcome:
    passed: bool
    probability: float
    post_state: np.ndarray


def check_clause(
    psi: np.ndarray, proj: ClauseProjector, rng: np.random.Generator
) -> MeasurementOutcome:
    """Sample one projective clause check {C, P} on a normalized state."""
    p_fail, p_pass = clause_check_probabilities(psi, proj)
    if rng.random() < p_fail:
        return MeasurementOutcome(False, p_fail, apply_fail(psi, proj))
    return MeasurementOutcome(True, p_pass, apply_pass(psi, proj))


def prob_one(psi: np.ndarray, qubit: int) -> float:
    """Probability that a computational-basis readout of ``qubit`` gives 1."""
    n = psi.shape[0].bit_length() - 1
    w = psi.reshape((2,) * n)
    slab = np.take(w, 1, axis=qubit - 1)
    return float(np.sum(slab * slab))


def z_expectation(psi: np.ndarray, qubit: int) -> float:
    """Readout expectation with outcome +1 on |1> and -1 on |0>.

    On a rotated product state this is +sin(theta) where the encoded bit is
    TRUE and -sin(theta) where it is FALSE.
    """
    return 2.0 * prob_one(psi, qubit) - 1.0


def sample_basis(psi: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    """Sample ``size`` full computational-basis measurement outcomes (indices)."""
    p = psi * psi
    total = p.sum()
    return rng.choice(psi.shape[0], size=size, p=p / total)


def dense_check_operator(proj: ClauseProjector, cap: int = DENSE_CAP) -> np.ndarray:
    return np.eye(1 << proj.n) - dense_projector(proj, cap)


def product_operator(
    f: Formula, theta: float, order=None, cap: int = DENSE_CAP
) -> np.ndarray:
    """Dense product of clause checks, ``order[0]`` acting first.

    At theta = pi/2 all checks commute and the product equals the
    ground-space projector.
    """
    check_cap(f.n, cap, "dense check product")
    projs = clause_projectors(f, theta)
    if order is None:
        order = range(f.m)
    t = np.eye(1 << f.n)
    for i in order:
        t = dense_check_operator(projs[i], cap) @ t
    return t


def dense_commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a, 2))


def kron_all(blocks) -> np.ndarray:
    return reduce(np.kron, blocks, np.array([[1.0]]))
