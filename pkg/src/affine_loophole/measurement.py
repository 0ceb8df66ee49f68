"""Projective product-basis measurements and two-party correlators.

Outcome ``k`` of an ``n``-qubit measurement is read as an ``n``-bit string with
qubit 0 as the most significant bit; a 0 bit means the ``+m`` projector of that
qubit fired. For two qubits the table order is ``(++, +-, -+, --)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError
from .qstate import PAULI, as_matrix, kron_all, num_qubits

SUM_ATOL = 1e-9
NEGATIVE_ATOL = 1e-12


@dataclass(frozen=True)
class MeasurementSetting:
    """Measurement axis of one qubit, as a unit Bloch direction."""

    bloch: tuple[float, float, float]

    def __post_init__(self):
        vec = np.asarray(self.bloch, dtype=float)
        if vec.shape != (3,) or abs(np.linalg.norm(vec) - 1.0) > 1e-10:
            raise ContractError(f"measurement direction must be a unit 3-vector, got {self.bloch}")
        object.__setattr__(self, "bloch", tuple(float(x) for x in vec))

    @classmethod
    def from_angle(cls, angle: float, plane: str = "xz") -> "MeasurementSetting":
        """Direction at ``angle`` from the second axis of ``plane`` towards the first.

        ``plane="xz"`` gives ``(sin t, 0, cos t)`` so that angle 0 is the z axis.
        """
        axes = {"x": 0, "y": 1, "z": 2}
        if len(plane) != 2 or any(c not in axes for c in plane) or plane[0] == plane[1]:
            raise ContractError(f"bad measurement plane {plane!r}")
        vec = [0.0, 0.0, 0.0]
        vec[axes[plane[0]]] = float(np.sin(angle))
        vec[axes[plane[1]]] = float(np.cos(angle))
        return cls(tuple(vec))

    def vector(self) -> np.ndarray:
        return np.array(self.bloch)

    def projector(self, sign: int) -> np.ndarray:
        m = self.bloch
        sigma = m[0] * PAULI["X"] + m[1] * PAULI["Y"] + m[2] * PAULI["Z"]
        return 0.5 * (PAULI["I"] + sign * sigma)

    def to_dict(self) -> dict:
        return {"bloch": list(self.bloch)}


def as_setting(s) -> MeasurementSetting:
    if isinstance(s, MeasurementSetting):
        return s
    return MeasurementSetting(tuple(s))


@dataclass
class ProbabilityTable:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ContractError("probability table must be a non-empty vector")
        if abs(self.values.sum() - 1.0) > SUM_ATOL:
            raise ContractError(f"probabilities sum to {self.values.sum()}, not 1")

    @property
    def n_outcomes(self) -> int:
        return self.values.size

    @property
    def negativity_flag(self) -> bool:
        return bool(np.any(self.values < -NEGATIVE_ATOL))

    def to_list(self) -> list[float]:
        return [float(v) for v in self.values]


def outcome_signs(n_qubits: int) -> np.ndarray:
    """``(2**n, n)`` array of +1/-1 per outcome and qubit."""
    bits = np.array(list(itertools.product((0, 1), repeat=n_qubits)), dtype=int)
    return 1 - 2 * bits


def projective_probabilities(rho, settings) -> ProbabilityTable:
    """``p_k = Tr(rho Pi_k)`` over the product projectors of ``settings``.

    ``rho`` only needs to be Hermitian with unit trace; negative outcomes of
    non-positive matrices are reported through ``negativity_flag``.
    """
    rho = as_matrix(rho)
    n = num_qubits(rho)
    settings = [as_setting(s) for s in settings]
    if len(settings) != n:
        raise DimensionError(f"{len(settings)} settings for a {n}-qubit matrix")
    values = []
    for signs in outcome_signs(n):
        proj = kron_all(s.projector(int(g)) for s, g in zip(settings, signs))
        values.append(float(np.sum(rho * proj.T).real))
    return ProbabilityTable(np.array(values))


def correlation(p: ProbabilityTable) -> float:
    """``E = p(++) - p(+-) - p(-+) + p(--)`` for a two-party table."""
    if p.n_outcomes != 4:
        raise DimensionError(f"correlation needs 4 outcomes, got {p.n_outcomes}")
    v = p.values
    return float(v[0] - v[1] - v[2] + v[3])


def singlet_correlation(angle: float) -> float:
    return -float(np.cos(angle))
