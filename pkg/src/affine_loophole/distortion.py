"""Detector and analysis errors that act affinely on outcome statistics.

Three models are covered: the linear correction ``X0 = s (X - b)``, symmetric
misclassification of a two-outcome detector, and a threshold device that
leaks a fixed ``theta`` counts from every cell. :class:`DistortionPipeline`
chains them on a count table, the way an analyst would before normalizing.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .affine import AffineMap
from .errors import ContractError, DegenerateDataError, DeviceSaturatedError
from .lhv import CountTable
from .measurement import ProbabilityTable

CLIP_RTOL = 1e-9


@dataclass(frozen=True)
class LinearCorrection:
    s: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not self.s > 0 or self.b < 0:
            raise ContractError(f"need s > 0 and b >= 0, got s={self.s}, b={self.b}")

    def then(self, other: "LinearCorrection") -> "LinearCorrection":
        """Correction equal to applying ``self`` first and ``other`` second."""
        # t (s (X - b) - c) = t s (X - (b + c / s))
        return LinearCorrection(self.s * other.s, self.b + other.b / self.s)


@dataclass(frozen=True)
class MisclassificationModel:
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.epsilon > -1:
            raise ContractError(f"epsilon must exceed -1, got {self.epsilon}")


@dataclass(frozen=True)
class ThresholdDevice:
    theta: float = 0.0

    def __post_init__(self):
        if self.theta < 0:
            raise ContractError(f"threshold must be nonnegative, got {self.theta}")


def correct_value(c: LinearCorrection, x):
    if isinstance(x, (int, float)):
        return c.s * (x - c.b)
    return c.s * (np.asarray(x, dtype=float) - c.b)


def misclassify(m: MisclassificationModel, p: ProbabilityTable) -> ProbabilityTable:
    """``p_i' = p_i + eps/2 (p_i - p_other) = (1 + eps) p_i - eps/2``."""
    if p.n_outcomes != 2:
        raise ContractError(f"symmetric misclassification needs 2 outcomes, got {p.n_outcomes}")
    p0, p1 = p.values
    eps = m.epsilon
    return ProbabilityTable([p0 + eps / 2 * (p0 - p1), p1 + eps / 2 * (p1 - p0)])


def misclassify_parties(m: MisclassificationModel, p: ProbabilityTable) -> ProbabilityTable:
    """Every party's detector misclassifies independently on a joint ``2**n`` table."""
    n = p.n_outcomes.bit_length() - 1
    if 1 << n != p.n_outcomes:
        raise ContractError("joint table size must be a power of two")
    eps = m.epsilon
    local = np.array([[1 + eps / 2, -eps / 2], [-eps / 2, 1 + eps / 2]])
    t = p.values.reshape((2,) * n)
    for axis in range(n):
        t = np.moveaxis(np.tensordot(local, t, axes=([1], [axis])), 0, axis)
    return ProbabilityTable(t.reshape(-1))


def threshold_counts(d: ThresholdDevice, raw: CountTable) -> CountTable:
    return CountTable(np.maximum(raw.counts - d.theta, 0.0))


def is_clipped(d: ThresholdDevice, raw: CountTable) -> bool:
    """True when some cell is below threshold, where the affine law no longer holds."""
    return bool(np.any(raw.counts < d.theta - CLIP_RTOL * max(d.theta, 1.0)))


def analyze_counts(raw: CountTable) -> ProbabilityTable:
    return _normalize(raw.counts)


def _normalize(values) -> ProbabilityTable:
    values = np.asarray(values, dtype=float)
    total = values.sum()
    if not total > 0:
        raise DegenerateDataError("no counts left to normalize")
    return ProbabilityTable(values / total)


def equivalent_affine(theta: float, trials: float, n_outcomes: int) -> AffineMap:
    """Affine map reproduced by a per-cell threshold on expected counts: ``a = 1/(1 - N theta/T)``."""
    if n_outcomes * theta >= trials:
        raise DeviceSaturatedError(f"N*theta = {n_outcomes * theta} >= T = {trials}")
    return AffineMap(1.0 / (1.0 - n_outcomes * theta / trials), n_outcomes)


def theta_for_affine(a: float, trials: float, n_outcomes: int) -> float:
    """Threshold that makes :func:`equivalent_affine` return ``a`` (``a >= 1``)."""
    if a < 1:
        raise ContractError("a threshold can only realize a >= 1")
    return trials * (1.0 - 1.0 / a) / n_outcomes


@dataclass(frozen=True)
class PipelineResult:
    table: ProbabilityTable
    clipped: bool


@dataclass(frozen=True)
class DistortionPipeline:
    """threshold -> linear correction per cell -> normalize -> per-party misclassification.

    ``mode`` tells drivers whether to feed expected counts or sampled counts.
    """

    s: float = 1.0
    b: float = 0.0
    epsilon: float = 0.0
    theta: float = 0.0
    mode: str = "expected"

    def __post_init__(self):
        if self.mode not in ("expected", "sampled"):
            raise ContractError(f"mode must be 'expected' or 'sampled', got {self.mode!r}")
        LinearCorrection(self.s, self.b)
        MisclassificationModel(self.epsilon)
        ThresholdDevice(self.theta)

    @classmethod
    def for_affine(cls, a: float, trials: float, n_outcomes: int = 4, mode: str = "expected"):
        return cls(theta=theta_for_affine(a, trials, n_outcomes), mode=mode)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DistortionPipeline":
        return cls(**data)

    def process(self, raw: CountTable) -> PipelineResult:
        device = ThresholdDevice(self.theta)
        cut = threshold_counts(device, raw)
        corrected = correct_value(LinearCorrection(self.s, self.b), cut.counts)
        clipped = is_clipped(device, raw) or bool(np.any(corrected < 0))
        table = _normalize(corrected)
        if self.epsilon:
            table = misclassify_parties(MisclassificationModel(self.epsilon), table)
        return PipelineResult(table, clipped)

    def correlation_gain(self, trials: float, n_outcomes: int = 4) -> float:
        """Factor by which a two-party correlator is scaled when nothing clips."""
        leak = self.theta + self.b
        if n_outcomes * leak >= trials:
            raise DeviceSaturatedError(f"N*(theta + b) = {n_outcomes * leak} >= T = {trials}")
        n_parties = n_outcomes.bit_length() - 1
        return (1.0 / (1.0 - n_outcomes * leak / trials)) * (1.0 + self.epsilon) ** n_parties
