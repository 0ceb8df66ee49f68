"""Dense linear algebra for multi-qubit density matrices.

Matrices are plain complex ``numpy`` arrays. Qubit 0 is the leftmost tensor
factor and the computational basis is enumerated in binary order, so for two
qubits the rows are ``00, 01, 10, 11``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DimensionError, InvalidBlochError, InvalidStateError

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
UNITARY_ATOL = 1e-10

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def num_qubits(m) -> int:
    """Number of qubits for a ``2**n x 2**n`` matrix."""
    dim = as_matrix(m).shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def identity(n_qubits: int) -> np.ndarray:
    return np.eye(2**n_qubits, dtype=complex)


def maximally_mixed(n_qubits: int) -> np.ndarray:
    return identity(n_qubits) / 2**n_qubits


def kron_all(factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


@functools.lru_cache(maxsize=4096)
def pauli_matrix(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. ``"XZ"`` is X on qubit 0.

    The cached result is read-only.
    """
    try:
        out = kron_all(PAULI[c] for c in label)
    except KeyError as exc:
        raise ContractError(f"bad Pauli label {label!r}") from exc
    out.flags.writeable = False
    return out


def is_hermitian(m, atol: float = HERMITIAN_ATOL) -> bool:
    m = as_matrix(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= atol)


def is_unitary(u, atol: float = UNITARY_ATOL) -> bool:
    u = as_matrix(u)
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= atol)


def validate_density(m) -> dict:
    """Check the three density-matrix conditions and report each separately."""
    m = as_matrix(m)
    herm_dev = float(np.max(np.abs(m - m.conj().T)))
    trace_dev = float(abs(np.trace(m) - 1.0))
    hermitian = herm_dev <= HERMITIAN_ATOL
    min_eig = None
    if hermitian:
        min_eig = float(hermitian_eigensystem(m)[0][0])
    try:
        power_of_two = num_qubits(m) >= 0
    except DimensionError:
        power_of_two = False
    return {
        "dim": m.shape[0],
        "power_of_two": power_of_two,
        "hermitian": hermitian,
        "hermitian_deviation": herm_dev,
        "unit_trace": trace_dev <= TRACE_ATOL,
        "trace_deviation": trace_dev,
        "psd": min_eig is not None and min_eig >= -PSD_ATOL,
        "min_eigenvalue": min_eig,
    }


def check_density(m) -> np.ndarray:
    """Return ``m`` as an array, raising ``InvalidStateError`` if it is not a state."""
    report = validate_density(m)
    if not report["power_of_two"]:
        raise DimensionError(f"dimension {report['dim']} is not a power of two")
    for key in ("hermitian", "unit_trace", "psd"):
        if not report[key]:
            raise InvalidStateError(f"not a density matrix: {key} check failed ({report})")
    return as_matrix(m)


# Bloch representation -----------------------------------------------------


def density_from_bloch(v) -> np.ndarray:
    """One-qubit state ``(I + a.sigma) / 2`` for a Bloch vector with norm <= 1."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise InvalidBlochError(f"Bloch vector needs 3 components, got {v.shape}")
    if np.linalg.norm(v) > 1 + 1e-12:
        raise InvalidBlochError(f"Bloch vector norm {np.linalg.norm(v)} exceeds 1")
    return 0.5 * (PAULI["I"] + v[0] * PAULI["X"] + v[1] * PAULI["Y"] + v[2] * PAULI["Z"])


def bloch_from_density(rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (2, 2):
        raise DimensionError("Bloch vectors exist only for one-qubit states")
    return np.array([np.trace(rho @ PAULI[c]).real for c in "XYZ"])


def purity_norm(v) -> float:
    """Length of the Bloch vector; 1 for pure states, below 1 for mixed ones."""
    return float(np.linalg.norm(np.asarray(v, dtype=float)))


def tensor(*states) -> np.ndarray:
    return kron_all(as_matrix(s) for s in states)


# Pauli basis -------------------------------------------------------------


@dataclass
class PauliDecomposition:
    """Real coefficients ``c_s`` with ``M = sum_s c_s P_s``."""

    n_qubits: int
    coefficients: dict[str, float] = field(default_factory=dict)

    def identity_label(self) -> str:
        return "I" * self.n_qubits

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "coefficients": dict(sorted(self.coefficients.items()))}


def pauli_labels(n_qubits: int):
    return ("".join(p) for p in itertools.product("IXYZ", repeat=n_qubits))


def pauli_decompose(m, drop_below: float = 1e-14) -> PauliDecomposition:
    m = as_matrix(m)
    n = num_qubits(m)
    if not is_hermitian(m, 1e-10):
        raise ContractError("Pauli decomposition with real coefficients needs a Hermitian matrix")
    dim = 2**n
    coeffs = {}
    for label in pauli_labels(n):
        # Tr(M P) = sum_ij M_ij P_ji
        c = float(np.sum(m * pauli_matrix(label).T).real) / dim
        if abs(c) > drop_below:
            coeffs[label] = c
    return PauliDecomposition(n, coeffs)


def pauli_reconstruct(d: PauliDecomposition) -> np.ndarray:
    out = np.zeros((2**d.n_qubits, 2**d.n_qubits), dtype=complex)
    for label, c in d.coefficients.items():
        out += c * pauli_matrix(label)
    return out


# Unitary evolution and spectra --------------------------------------------


def apply_unitary(rho, u) -> np.ndarray:
    rho, u = as_matrix(rho), as_matrix(u)
    if rho.shape != u.shape:
        raise DimensionError(f"state {rho.shape} and gate {u.shape} dimensions differ")
    return u @ rho @ u.conj().T


def hermitian_eigensystem(m, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as the columns of a unitary matrix.
    """
    a = as_matrix(m).copy()
    if not is_hermitian(a, 1e-10):
        raise ContractError("hermitian_eigensystem needs a Hermitian matrix")
    a = 0.5 * (a + a.conj().T)
    dim = a.shape[0]
    v = np.eye(dim, dtype=complex)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol:
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = complex(a[p, q])
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0)) if theta else 1.0
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # diag(1, conj(phase)) makes the pivot real, then a real rotation zeroes it
                cph, sph = c * phase.conjugate(), s * phase.conjugate()
                for x in (a, v):
                    xp, xq = x[:, p].copy(), x[:, q]
                    x[:, p] = c * xp - sph * xq
                    x[:, q] = s * xp + cph * xq
                rp, rq = a[p, :].copy(), a[q, :]
                a[p, :] = c * rp - s * phase * rq
                a[q, :] = s * rp + c * phase * rq
                a[p, q] = a[q, p] = 0.0
    evals = np.diag(a).real
    order = np.argsort(evals, kind="stable")
    return evals[order], v[:, order]


def random_unitary(seed: int, n_qubits: int) -> np.ndarray:
    """Deterministic unitary from seeded complex Gaussians and modified Gram-Schmidt."""
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q = np.zeros_like(z)
    for k in range(dim):
        col = z[:, k].copy()
        for j in range(k):
            col -= np.vdot(q[:, j], col) * q[:, j]
        q[:, k] = col / np.linalg.norm(col)
    return q


def random_density(seed: int, n_qubits: int, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed random state (full rank unless ``rank`` is given)."""
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(seed: int, n_qubits: int) -> np.ndarray:
    return random_density(seed, n_qubits, rank=1)


def bell_singlet() -> np.ndarray:
    """|psi><psi| for (|01> - |10>)/sqrt(2)."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())
