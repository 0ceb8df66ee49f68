import numpy as np
import pytest

from affine_loophole.affine import (
    AffineMap,
    affine_apply,
    affine_inverse,
    check_commutation,
    pseudo_pure_split,
    transform_probabilities,
)
from affine_loophole.errors import ContractError, DimensionError
from affine_loophole.measurement import MeasurementSetting, ProbabilityTable, projective_probabilities
from affine_loophole.qstate import bell_singlet, maximally_mixed, random_pure, random_unitary
from affine_loophole.separability import qdice_decomposition


def werner(a):
    """Singlet mixed with white noise, pure fraction 1/a."""
    return bell_singlet() / a + (1 - 1 / a) * np.eye(4) / 4


def random_settings(rng, n):
    out = []
    for _ in range(n):
        v = rng.normal(size=3)
        out.append(MeasurementSetting(tuple(v / np.linalg.norm(v))))
    return out


def test_affine_map_contract():
    with pytest.raises(ContractError):
        AffineMap(0.0, 2)
    assert AffineMap(3, 4).to_dict() == {"a": 3.0, "dim": 4}


def test_affine_apply_examples(random_states):
    rho = random_states(2, 1)[0]
    np.testing.assert_allclose(affine_apply(AffineMap(1, 4), rho), rho)
    np.testing.assert_allclose(
        affine_apply(AffineMap(3, 4), qdice_decomposition().state()), bell_singlet(), atol=1e-15
    )
    w = affine_apply(AffineMap(1 / 3, 4), bell_singlet())
    np.testing.assert_allclose(np.linalg.eigvalsh(w), [1 / 6, 1 / 6, 1 / 6, 1 / 2], atol=1e-15)
    with pytest.raises(DimensionError):
        affine_apply(AffineMap(2, 2), rho)


def test_affine_apply_keeps_trace_and_hermiticity_for_large_a(random_states):
    for rho in random_states(2, 10):
        out = affine_apply(AffineMap(7.5, 4), rho)
        assert np.trace(out).real == pytest.approx(1, abs=1e-12)
        np.testing.assert_allclose(out, out.conj().T, atol=1e-15)


def test_affine_inverse(random_states):
    assert affine_inverse(AffineMap(3, 4)).a == pytest.approx(1 / 3)
    assert affine_inverse(AffineMap(1, 4)).a == 1
    rng = np.random.default_rng(0)
    for rho in random_states(2, 50):
        amap = AffineMap(rng.uniform(0.1, 10), 4)
        back = affine_apply(affine_inverse(amap), affine_apply(amap, rho))
        assert np.linalg.norm(back - rho) <= 1e-12


def test_composition_multiplies_parameters(random_states):
    rng = np.random.default_rng(1)
    for rho in random_states(2, 30):
        a, b = rng.uniform(0.1, 10, size=2)
        two_step = affine_apply(AffineMap(a, 4), affine_apply(AffineMap(b, 4), rho))
        assert np.linalg.norm(two_step - affine_apply(AffineMap(a * b, 4), rho)) <= 1e-12


def test_transform_probabilities_examples():
    out = transform_probabilities(AffineMap(3, 4), ProbabilityTable([1 / 6, 1 / 3, 1 / 3, 1 / 6]))
    np.testing.assert_allclose(out.values, [0, 0.5, 0.5, 0], atol=1e-15)
    p = ProbabilityTable([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(transform_probabilities(AffineMap(1, 4), p).values, p.values)
    uniform = ProbabilityTable([0.25] * 4)
    np.testing.assert_allclose(transform_probabilities(AffineMap(3, 4), uniform).values, uniform.values)


def test_transform_probabilities_flags_negative_entries():
    out = transform_probabilities(AffineMap(5, 2), ProbabilityTable([0.9, 0.1]))
    assert out.negativity_flag
    assert out.values.sum() == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(out.values, [2.5, -1.5])


def test_transform_probabilities_matches_measuring_the_mapped_matrix(random_states):
    rng = np.random.default_rng(2)
    for rho in random_states(2, 30):
        amap = AffineMap(rng.uniform(0.1, 10), 4)
        settings = random_settings(rng, 2)
        lhs = transform_probabilities(amap, projective_probabilities(rho, settings))
        rhs = projective_probabilities(affine_apply(amap, rho), settings)
        np.testing.assert_allclose(lhs.values, rhs.values, atol=1e-10)
        assert lhs.values.sum() == pytest.approx(1, abs=1e-10)


def test_check_commutation(random_states, random_gates):
    rho = random_states(2, 1)[0]
    assert check_commutation(rho, np.eye(4), 4.0) == 0
    assert check_commutation(rho, random_unitary(1, 2), 1.0) <= 1e-15
    rng = np.random.default_rng(3)
    for rho, u in zip(random_states(2, 100), random_gates(2, 100)):
        assert check_commutation(rho, u, rng.uniform(0.1, 10)) <= 1e-10


def test_pseudo_pure_split_examples():
    psi = random_pure(0, 2)
    split = pseudo_pure_split(psi)
    assert split.a == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(split.pure_state, psi, atol=1e-10)

    split = pseudo_pure_split(werner(3))
    assert split.a == pytest.approx(3, rel=1e-10)
    np.testing.assert_allclose(split.pure_state, bell_singlet(), atol=1e-10)
    np.testing.assert_allclose(split.reconstruct(), werner(3), atol=1e-9)

    assert pseudo_pure_split(maximally_mixed(2)) is None
    assert pseudo_pure_split(np.diag([0.5, 0.3, 0.2, 0.0])) is None


def test_every_one_qubit_state_but_the_center_is_pseudo_pure(random_states):
    for rho in random_states(1, 20):
        split = pseudo_pure_split(rho)
        assert split is not None
        np.testing.assert_allclose(split.reconstruct(), rho, atol=1e-9)
