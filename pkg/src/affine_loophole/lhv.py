"""Local hidden-variable Monte Carlo source built from a separable decomposition.

The hidden variable is the index of a product term, drawn with the term
weights. Given the term, each party answers independently: ``+`` with
probability ``(1 + m . b) / 2`` where ``m`` is its measurement direction and
``b`` the Bloch vector of its local factor.

Random numbers come from a counter-based Philox stream. Trial ``i`` always
reads the same counter block, so any partition of the trial range into
batches, run in any order or concurrently, gives identical counts.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError
from .measurement import ProbabilityTable, as_setting, outcome_signs
from .separability import SeparableDecomposition

DEFAULT_BATCH = 1 << 18


@dataclass
class RandomStream:
    """Counter-based uniform stream keyed by ``(seed, stream)``.

    ``counter`` counts trials already consumed by the stateful helpers.
    """

    seed: int
    stream: int = 0
    counter: int = 0

    def block(self, start: int, count: int, width: int = 4) -> np.ndarray:
        """Uniforms for trials ``start .. start+count-1`` as a ``(count, width)`` array.

        ``width`` is rounded up to a multiple of 4 (one Philox block).
        """
        per_trial = -(-width // 4)
        bitgen = np.random.Philox(key=[self.seed, self.stream], counter=[start * per_trial, 0, 0, 0])
        u = np.random.Generator(bitgen).random(4 * per_trial * count)
        return u.reshape(count, 4 * per_trial)[:, :width]

    def draw(self, count: int, width: int = 4) -> np.ndarray:
        u = self.block(self.counter, count, width)
        self.counter += count
        return u

    def spawn(self, stream: int) -> "RandomStream":
        return RandomStream(self.seed, stream)


@dataclass
class HiddenVariableModel:
    weights: np.ndarray
    local_bloch: np.ndarray  # (terms, parties, 3)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.local_bloch = np.asarray(self.local_bloch, dtype=float)
        if self.local_bloch.ndim != 3 or self.local_bloch.shape[2] != 3:
            raise ContractError("local_bloch must have shape (terms, parties, 3)")
        if self.local_bloch.shape[0] != self.weights.size:
            raise ContractError("one set of local Bloch vectors per weight is required")
        if np.any(self.weights < -1e-12) or abs(self.weights.sum() - 1.0) > 1e-10:
            raise ContractError("weights must form a probability distribution")
        if np.any(np.linalg.norm(self.local_bloch, axis=2) > 1 + 1e-12):
            raise ContractError("local Bloch vectors must have norm <= 1")

    @property
    def n_parties(self) -> int:
        return self.local_bloch.shape[1]

    @property
    def n_terms(self) -> int:
        return self.weights.size


@dataclass
class CountTable:
    counts: np.ndarray
    total: float | None = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if np.any(self.counts < 0):
            raise ContractError("counts must be nonnegative")
        if self.total is None:
            self.total = float(self.counts.sum())

    @property
    def n_outcomes(self) -> int:
        return self.counts.size

    def to_dict(self) -> dict:
        counts = [int(c) if float(c).is_integer() else float(c) for c in self.counts]
        total = int(self.total) if float(self.total).is_integer() else float(self.total)
        return {"total": total, "counts": counts}


def model_from_decomposition(d: SeparableDecomposition) -> HiddenVariableModel:
    """Classical source emitting the separable mixture; the affine parameter is dropped."""
    bloch = np.array([[f.bloch() for f in factors] for factors in d.products])
    weights = np.clip(d.weights, 0.0, None)
    return HiddenVariableModel(weights / weights.sum(), bloch)


def _plus_probabilities(model: HiddenVariableModel, settings) -> np.ndarray:
    """``(terms, parties)`` probability of the ``+`` answer."""
    settings = [as_setting(s) for s in settings]
    if len(settings) != model.n_parties:
        raise DimensionError(f"{len(settings)} settings for {model.n_parties} parties")
    m = np.array([s.vector() for s in settings])
    return 0.5 * (1.0 + np.einsum("tkc,kc->tk", model.local_bloch, m))


def exact_probabilities(model: HiddenVariableModel, settings) -> ProbabilityTable:
    """Outcome distribution of the source, averaged over the hidden variable."""
    plus = _plus_probabilities(model, settings)
    signs = outcome_signs(model.n_parties)
    # (terms, outcomes, parties) -> product over parties
    local = np.where(signs[None, :, :] > 0, plus[:, None, :], 1.0 - plus[:, None, :])
    return ProbabilityTable(model.weights @ np.prod(local, axis=2))


def outcomes_from_uniforms(model: HiddenVariableModel, settings, u: np.ndarray, return_terms: bool = False):
    """Map per-trial uniforms (column 0 hidden variable, column 1+k party k) to outcomes."""
    plus = _plus_probabilities(model, settings)
    n = model.n_parties
    cdf = np.cumsum(model.weights)
    terms = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right"), model.n_terms - 1)
    bits = u[:, 1 : 1 + n] >= plus[terms]
    outcome = bits.astype(np.int64) @ (1 << np.arange(n - 1, -1, -1))
    if return_terms:
        return outcome, terms
    return outcome


def sample_trial(model: HiddenVariableModel, settings, rng: RandomStream) -> int:
    return int(outcomes_from_uniforms(model, settings, rng.draw(1, 1 + model.n_parties))[0])


def run_trials(
    model: HiddenVariableModel,
    settings,
    trials: int,
    rng: RandomStream,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
) -> CountTable:
    """Histogram of ``trials`` outcomes, consuming the next ``trials`` counters of ``rng``."""
    if trials < 1:
        raise ContractError("need at least one trial")
    n = model.n_parties
    start = rng.counter
    ranges = [(s, min(batch_size, start + trials - s)) for s in range(start, start + trials, batch_size)]

    def batch(r):
        u = rng.block(r[0], r[1], 1 + n)
        return np.bincount(outcomes_from_uniforms(model, settings, u), minlength=2**n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(batch, ranges))
    else:
        parts = [batch(r) for r in ranges]
    rng.counter += trials
    return CountTable(np.sum(parts, axis=0), float(trials))
