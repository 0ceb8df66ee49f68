"""CHSH values and angular correlation curves for quantum and classical sources.

A *source* is either a two-qubit density matrix (quantum) or a
:class:`HiddenVariableModel` (classical). Either may be passed through a
:class:`DistortionPipeline`; exact runs feed it expected counts ``T * p``,
sampled runs feed it Monte Carlo counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distortion import DistortionPipeline
from .errors import ContractError, DimensionError
from .lhv import CountTable, HiddenVariableModel, RandomStream, exact_probabilities, run_trials
from .measurement import MeasurementSetting, ProbabilityTable, as_setting, correlation, projective_probabilities

DEFAULT_TRIALS = 1_200_000
CHSH_SIGNS = np.array([1.0, -1.0, 1.0, 1.0])


@dataclass(frozen=True)
class ChshSettings:
    """Two settings per side; arms are ``(a,b), (a,b'), (a',b), (a',b')``."""

    a: MeasurementSetting
    a_prime: MeasurementSetting
    b: MeasurementSetting
    b_prime: MeasurementSetting

    @classmethod
    def from_angles(cls, a: float, a_prime: float, b: float, b_prime: float, plane: str = "xz"):
        return cls(*(MeasurementSetting.from_angle(t, plane) for t in (a, a_prime, b, b_prime)))

    @classmethod
    def canonical(cls) -> "ChshSettings":
        return cls.from_angles(0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)

    def arms(self) -> list[tuple[MeasurementSetting, MeasurementSetting]]:
        return [(self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime)]

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k).bloch) for k in ("a", "a_prime", "b", "b_prime")}


@dataclass
class ChshResult:
    correlations: np.ndarray
    errors: np.ndarray = field(default_factory=lambda: np.zeros(4))
    clipped: bool = False

    @property
    def S(self) -> float:
        return float(abs(CHSH_SIGNS @ self.correlations))

    @property
    def S_error(self) -> float:
        return float(np.sqrt(np.sum(np.asarray(self.errors) ** 2)))

    def to_dict(self) -> dict:
        return {
            "E": [float(e) for e in self.correlations],
            "E_errors": [float(e) for e in self.errors],
            "S": self.S,
            "S_error": self.S_error,
            "clipped": self.clipped,
        }


@dataclass
class AngularCurve:
    theta: np.ndarray
    E: np.ndarray
    source: str

    def to_rows(self) -> list[tuple[float, float, str]]:
        return [(float(t), float(e), self.source) for t, e in zip(self.theta, self.E)]


def _check_two_party(source):
    if isinstance(source, HiddenVariableModel):
        if source.n_parties != 2:
            raise DimensionError("CHSH needs a two-party source")
    elif np.asarray(source).shape != (4, 4):
        raise DimensionError("CHSH needs a two-qubit state")


def exact_table(source, settings) -> ProbabilityTable:
    if isinstance(source, HiddenVariableModel):
        return exact_probabilities(source, settings)
    return projective_probabilities(source, settings)


def distorted_table(source, settings, pipeline=None, trials: float = DEFAULT_TRIALS):
    """Exact table of ``source``, optionally passed through ``pipeline`` as expected counts.

    Returns ``(table, clipped)``.
    """
    p = exact_table(source, settings)
    if pipeline is None:
        return p, False
    out = pipeline.process(CountTable(trials * np.clip(p.values, 0.0, None), float(trials)))
    return out.table, out.clipped


def chsh_exact(source, settings: ChshSettings | None = None, pipeline: DistortionPipeline | None = None,
               trials: float = DEFAULT_TRIALS) -> ChshResult:
    _check_two_party(source)
    settings = settings or ChshSettings.canonical()
    E, clipped = [], False
    for arm in settings.arms():
        table, c = distorted_table(source, arm, pipeline, trials)
        E.append(correlation(table))
        clipped |= c
    return ChshResult(np.array(E), np.zeros(4), clipped)


def chsh_sampled(model: HiddenVariableModel, pipeline: DistortionPipeline | None = None,
                 settings: ChshSettings | None = None, trials: int = DEFAULT_TRIALS, seed: int = 0,
                 workers: int = 1) -> ChshResult:
    """Monte Carlo CHSH; arm ``i`` draws from substream ``i + 1`` of ``seed``.

    Errors are multinomial standard errors of the raw correlators, scaled by
    the pipeline's correlator gain.
    """
    if trials < 10_000:
        raise ContractError("sampled CHSH needs at least 1e4 trials per arm")
    _check_two_party(model)
    settings = settings or ChshSettings.canonical()
    gain = 1.0 if pipeline is None else pipeline.correlation_gain(trials, 4)
    E, err, clipped = [], [], False
    for i, arm in enumerate(settings.arms()):
        counts = run_trials(model, arm, trials, RandomStream(seed, i + 1), workers=workers)
        raw = ProbabilityTable(counts.counts / counts.counts.sum())
        e_raw = correlation(raw)
        err.append(gain * np.sqrt(max(1.0 - e_raw**2, 0.0) / trials))
        if pipeline is None:
            E.append(e_raw)
        else:
            out = pipeline.process(counts)
            E.append(correlation(out.table))
            clipped |= out.clipped
    return ChshResult(np.array(E), np.array(err), clipped)


def angular_sweep(source, pipeline: DistortionPipeline | None = None, n_points: int = 64,
                  trials: float = DEFAULT_TRIALS, label: str | None = None) -> AngularCurve:
    """Exact ``E(theta)`` on a uniform grid over ``[0, pi]``, x-z plane, first setting along z."""
    if n_points < 2:
        raise ContractError("need at least two grid points")
    _check_two_party(source)
    grid = np.linspace(0.0, np.pi, n_points)
    first = MeasurementSetting.from_angle(0.0)
    E = []
    for t in grid:
        table, _ = distorted_table(source, [first, MeasurementSetting.from_angle(t)], pipeline, trials)
        E.append(correlation(table))
    if label is None:
        if not isinstance(source, HiddenVariableModel):
            label = "quantum"
        else:
            label = "classical-raw" if pipeline is None else "classical-distorted"
    return AngularCurve(grid, np.array(E), label)


def random_chsh_settings(rng: np.random.Generator) -> ChshSettings:
    v = rng.normal(size=(4, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return ChshSettings(*(as_setting(tuple(x)) for x in v))
