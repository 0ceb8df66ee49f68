"""Constructive separable decompositions over local Pauli-axis projectors.

Any ``n``-qubit state ``rho`` is written as a combination of products of the
six single-qubit projectors ``(I +- sigma_mu)/2``. Negative products are
traded for the remaining products of an identity expansion plus a negative
multiple ``-x`` of the identity. Mixing ``rho`` with white noise,
``sigma = (rho + x I) / (1 + N x)``, then gives a separable state with
``rho = a sigma + (1 - a) I/N`` and ``a = N x + 1``.

A two-qubit partial-transpose oracle is provided to check the constructed
states and to find the smallest white-noise parameter for comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .affine import AffineMap, affine_apply
from .errors import ContractError, DimensionError
from .qstate import (
    PAULI,
    PauliDecomposition,
    check_density,
    hermitian_eigensystem,
    kron_all,
    num_qubits,
    pauli_decompose,
)

ZERO_ATOL = 1e-12
PPT_ATOL = 1e-10

AXES = ("x", "y", "z")
_PAULI_OF_AXIS = {"x": "X", "y": "Y", "z": "Z"}
_AXIS_OF_PAULI = {"X": "x", "Y": "y", "Z": "z"}
_BLOCH = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class AxisProjector(NamedTuple):
    """``(I + sign * sigma_axis) / 2``; ordered as ``(axis, sign)`` tuples."""

    axis: str
    sign: int

    @classmethod
    def parse(cls, label: str) -> "AxisProjector":
        if len(label) != 2 or label[0] not in AXES or label[1] not in "+-":
            raise ContractError(f"bad projector label {label!r}")
        return cls(label[0], 1 if label[1] == "+" else -1)

    @property
    def label(self) -> str:
        return self.axis + ("+" if self.sign > 0 else "-")

    def bloch(self) -> np.ndarray:
        return self.sign * np.array(_BLOCH[self.axis])

    def matrix(self) -> np.ndarray:
        return 0.5 * (PAULI["I"] + self.sign * PAULI[_PAULI_OF_AXIS[self.axis]])


Factors = tuple[AxisProjector, ...]


def projector_matrix(p: AxisProjector) -> np.ndarray:
    return p.matrix()


def product_matrix(factors: Factors) -> np.ndarray:
    return kron_all(f.matrix() for f in factors)


@dataclass
class ProductTerm:
    coefficient: float
    factors: Factors

    def matrix(self) -> np.ndarray:
        return self.coefficient * product_matrix(self.factors)


@dataclass
class EliminationResult:
    """Nonnegative product terms and the identity deficit ``x``.

    The source matrix equals ``sum(terms) - x * I``.
    """

    terms: list[ProductTerm]
    deficit: float
    n_qubits: int

    def reconstruct(self) -> np.ndarray:
        out = -self.deficit * np.eye(2**self.n_qubits, dtype=complex)
        for t in self.terms:
            out = out + t.matrix()
        return out


@dataclass
class SeparableDecomposition:
    weights: np.ndarray
    products: list[Factors]
    a: float
    n_qubits: int = field(default=0)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if not self.n_qubits and self.products:
            self.n_qubits = len(self.products[0])

    def state(self) -> np.ndarray:
        """The separable mixture ``sum_mu lambda_mu (x) factors_mu``."""
        out = np.zeros((2**self.n_qubits, 2**self.n_qubits), dtype=complex)
        for w, factors in zip(self.weights, self.products):
            out += w * product_matrix(factors)
        return out

    def reconstruct(self) -> np.ndarray:
        """Apply the recorded affine map to the separable state."""
        return affine_apply(AffineMap(self.a, 2**self.n_qubits), self.state())

    def to_dict(self) -> dict:
        return {
            "a": float(self.a),
            "terms": [
                {"weight": float(w), "factors": [f.label for f in factors]}
                for w, factors in zip(self.weights, self.products)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SeparableDecomposition":
        products = [tuple(AxisProjector.parse(s) for s in t["factors"]) for t in data["terms"]]
        return cls([t["weight"] for t in data["terms"]], products, float(data["a"]))


def _consolidate(coeffs: dict) -> list[ProductTerm]:
    return [ProductTerm(c, k) for k, c in sorted(coeffs.items()) if abs(c) > ZERO_ATOL]


def _identity_expansion(axes) -> list[Factors]:
    """All sign patterns of ``(x)_k (rho_k^+ + rho_k^-)`` on the given axes."""
    return [
        tuple(AxisProjector(ax, s) for ax, s in zip(axes, signs))
        for signs in itertools.product((1, -1), repeat=len(axes))
    ]


def product_basis_expand(d: PauliDecomposition, expand_identity: bool = True) -> list[ProductTerm]:
    """Rewrite every Pauli string as signed products of axis projectors.

    ``sigma_mu -> rho_mu^+ - rho_mu^-`` and an identity factor becomes
    ``rho_z^+ + rho_z^-``. With ``expand_identity=False`` the all-identity
    string is left out so the caller can keep it as a separate account.
    """
    coeffs: dict[Factors, float] = {}
    for label, c in d.coefficients.items():
        if not expand_identity and set(label) <= {"I"}:
            continue
        options = []
        for ch in label:
            if ch == "I":
                options.append(((AxisProjector("z", 1), 1), (AxisProjector("z", -1), 1)))
            else:
                ax = _AXIS_OF_PAULI[ch]
                options.append(((AxisProjector(ax, 1), 1), (AxisProjector(ax, -1), -1)))
        for combo in itertools.product(*options):
            factors = tuple(p for p, _ in combo)
            sign = 1
            for _, g in combo:
                sign *= g
            coeffs[factors] = coeffs.get(factors, 0.0) + sign * c
    return _consolidate(coeffs)


def eliminate_negatives(
    terms: list[ProductTerm],
    identity_mass: float = 0.0,
    strategy: str = "batch",
    n_qubits: int | None = None,
) -> EliminationResult:
    """Remove negative product terms at the cost of an identity deficit.

    A term ``-alpha T`` becomes ``+alpha`` on each of the other ``2**n - 1``
    products of the identity expansion over ``T``'s axes, and ``alpha`` is
    charged to the identity account. ``identity_mass`` is the coefficient of
    ``I`` already present in the source; it is netted against the charges and
    any surplus is expanded along z.

    ``strategy="batch"`` replaces every negative term of the input at once.
    ``strategy="sequential"`` replaces one negative term at a time in
    lexicographic order and merges after each step, so later negatives can be
    cancelled by earlier replacements.
    """
    n = n_qubits if n_qubits is not None else (len(terms[0].factors) if terms else 0)
    if any(len(t.factors) != n for t in terms):
        raise ContractError("all product terms must act on the same number of qubits")
    coeffs: dict[Factors, float] = {}
    for t in terms:
        coeffs[t.factors] = coeffs.get(t.factors, 0.0) + t.coefficient

    charges = 0.0
    if strategy == "batch":
        out = {k: c for k, c in coeffs.items() if c > ZERO_ATOL}
        for k in sorted(k for k, c in coeffs.items() if c < -ZERO_ATOL):
            alpha = -coeffs[k]
            charges += alpha
            for sib in _identity_expansion([f.axis for f in k]):
                if sib != k:
                    out[sib] = out.get(sib, 0.0) + alpha
        coeffs = out
    elif strategy == "sequential":
        while True:
            negative = sorted(k for k, c in coeffs.items() if c < -ZERO_ATOL)
            if not negative:
                break
            k = negative[0]
            alpha = -coeffs.pop(k)
            charges += alpha
            for sib in _identity_expansion([f.axis for f in k]):
                if sib != k:
                    coeffs[sib] = coeffs.get(sib, 0.0) + alpha
        coeffs = {k: c for k, c in coeffs.items() if c > ZERO_ATOL}
    else:
        raise ContractError(f"unknown elimination strategy {strategy!r}")

    net = identity_mass - charges
    deficit = 0.0
    if net >= 0.0:
        if n and net > ZERO_ATOL:
            for k in _identity_expansion(["z"] * n):
                coeffs[k] = coeffs.get(k, 0.0) + net
    else:
        deficit = -net
    return EliminationResult(_consolidate(coeffs), deficit, n)


def affine_parameter_from_deficit(x: float, N: int) -> float:
    if x < 0:
        raise ContractError(f"identity deficit must be nonnegative, got {x}")
    return N * x + 1.0


def separate(rho, strategy: str = "batch") -> SeparableDecomposition:
    """Separable state ``sigma`` and parameter ``a`` with ``A_a(sigma) = rho``."""
    rho = check_density(rho)
    n = num_qubits(rho)
    if n < 1:
        raise DimensionError("need at least one qubit")
    dim = 2**n
    d = pauli_decompose(rho)

    full = product_basis_expand(d)
    if all(t.coefficient > 0 for t in full):
        elim = EliminationResult(full, 0.0, n)
    else:
        identity_mass = d.coefficients.get("I" * n, 0.0)
        elim = eliminate_negatives(
            product_basis_expand(d, expand_identity=False), identity_mass, strategy, n
        )

    a = affine_parameter_from_deficit(elim.deficit, dim)
    weights = np.array([t.coefficient for t in elim.terms]) / a
    return SeparableDecomposition(weights, [t.factors for t in elim.terms], a, n)


def qdice_decomposition() -> SeparableDecomposition:
    """Uniform mixture of the six anticorrelated axis products; ``a = 3`` gives the singlet."""
    products = []
    for ax in ("z", "x", "y"):
        products.append((AxisProjector(ax, 1), AxisProjector(ax, -1)))
        products.append((AxisProjector(ax, -1), AxisProjector(ax, 1)))
    return SeparableDecomposition(np.full(6, 1 / 6), products, 3.0, 2)


# Two-qubit partial-transpose oracle ---------------------------------------


def partial_transpose(rho) -> np.ndarray:
    """Transpose the indices of the second qubit of a two-qubit matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError("partial transpose oracle is defined for two qubits only")
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def partial_transpose_min_eigenvalue(rho) -> float:
    return float(hermitian_eigensystem(partial_transpose(rho))[0][0])


def minimal_mixing_parameter(rho, tol: float = 1e-6) -> float:
    """Smallest ``a >= 1`` for which ``A_{1/a}(rho)`` has a positive partial transpose."""
    if tol <= 0:
        raise ContractError("tol must be positive")
    rho = check_density(rho)
    if rho.shape != (4, 4):
        raise DimensionError("minimal_mixing_parameter is defined for two qubits only")

    def separable_at(a: float) -> bool:
        mixed = affine_apply(AffineMap(1.0 / a, 4), rho)
        return partial_transpose_min_eigenvalue(mixed) >= -PPT_ATOL

    if separable_at(1.0):
        return 1.0
    lo, hi = 1.0, 16.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if separable_at(mid):
            hi = mid
        else:
            lo = mid
    return hi
