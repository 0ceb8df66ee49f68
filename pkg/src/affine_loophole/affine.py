"""The affine family ``rho -> a*rho + (1 - a) * I/N`` and what it does to data.

For ``a > 1`` the image of a state is generally not positive semidefinite,
so :func:`affine_apply` returns a bare Hermitian matrix and leaves any state
validation to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError, DimensionError
from .measurement import ProbabilityTable
from .qstate import apply_unitary, as_matrix, hermitian_eigensystem

DEGENERACY_ATOL = 1e-8


@dataclass(frozen=True)
class AffineMap:
    a: float
    dim: int

    def __post_init__(self):
        if not self.a > 0:
            raise ContractError(f"affine parameter must be positive, got {self.a}")
        if self.dim < 1:
            raise ContractError(f"dimension must be positive, got {self.dim}")

    def to_dict(self) -> dict:
        return {"a": float(self.a), "dim": int(self.dim)}


def affine_apply(amap: AffineMap, rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != amap.dim:
        raise DimensionError(f"map acts on dimension {amap.dim}, state has {rho.shape[0]}")
    return amap.a * rho + (1.0 - amap.a) * np.eye(amap.dim) / amap.dim


def affine_inverse(amap: AffineMap) -> AffineMap:
    return AffineMap(1.0 / amap.a, amap.dim)


def transform_probabilities(amap: AffineMap, p: ProbabilityTable) -> ProbabilityTable:
    """Outcome probabilities of the affinely related model: ``a*p_k - (a-1)/N``.

    Negative entries are kept; the returned table flags them.
    """
    if p.n_outcomes != amap.dim:
        raise DimensionError(f"table has {p.n_outcomes} outcomes, map has N={amap.dim}")
    values = amap.a * p.values - (amap.a - 1.0) / amap.dim
    return ProbabilityTable(values)


def check_commutation(rho, u, a: float) -> float:
    """Frobenius distance between the two paths of the affine/unitary square."""
    rho, u = as_matrix(rho), as_matrix(u)
    if rho.shape != u.shape:
        raise DimensionError(f"state {rho.shape} and gate {u.shape} dimensions differ")
    amap = AffineMap(a, rho.shape[0])
    right_down = affine_apply(amap, apply_unitary(rho, u))
    down_right = apply_unitary(affine_apply(amap, rho), u)
    return float(np.linalg.norm(right_down - down_right))


@dataclass
class PseudoPureSplit:
    """``rho = pure / a + (1 - 1/a) I/N`` with ``pure`` a rank-one projector."""

    a: float
    pure_state: np.ndarray

    def reconstruct(self) -> np.ndarray:
        dim = self.pure_state.shape[0]
        return self.pure_state / self.a + (1.0 - 1.0 / self.a) * np.eye(dim) / dim


def pseudo_pure_split(rho, atol: float = DEGENERACY_ATOL) -> Optional[PseudoPureSplit]:
    """Detect a pseudo-pure state; ``None`` if the spectrum has the wrong shape."""
    rho = as_matrix(rho)
    dim = rho.shape[0]
    if dim < 2:
        return None
    evals, _ = hermitian_eigensystem(rho)
    low, top = evals[: dim - 1], evals[-1]
    if np.ptp(low) > atol or top - low[-1] <= atol:
        return None
    lam_min = float(np.mean(low))
    gap = float(top) - lam_min
    # the projector follows from rho directly, which stays accurate when the gap is tiny
    pure = (rho - lam_min * np.eye(dim)) / gap
    pure = 0.5 * (pure + pure.conj().T)
    return PseudoPureSplit(a=1.0 / gap, pure_state=pure)
