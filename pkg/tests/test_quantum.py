import math

import numpy as np
import pytest

from qentropic.entropy import DomainError
from qentropic.quantum import (
    DichotomicSpinObservable,
    KcbsConfig,
    QuantumState,
    RankOneTest,
    chsh_correlation,
    chsh_joint_dist,
    kcbs_pair_correlation,
    kcbs_sequential_joint,
    kcbs_state,
    kcbs_vector_array,
    kcbs_vectors,
    post_measurement_state,
    sequential_tables,
    singlet_state,
    spin_pair_joint_dist,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def born_oracle(a, b, psi):
    """p(x, y) from eigendecompositions of the full two-qubit observables and a density matrix."""
    rho = np.outer(psi, psi.conj())
    ops = []
    for vec, side in ((a, 0), (b, 1)):
        m = vec[0] * PAULI_X + vec[1] * PAULI_Y + vec[2] * PAULI_Z
        full = np.kron(m, np.eye(2)) if side == 0 else np.kron(np.eye(2), m)
        w, v = np.linalg.eigh(full)
        ops.append({s: v[:, np.isclose(w, s)] @ v[:, np.isclose(w, s)].conj().T for s in (1, -1)})
    out = np.empty((2, 2))
    for i, x in enumerate((1, -1)):
        for k, y in enumerate((1, -1)):
            out[i, k] = np.trace(rho @ ops[0][x] @ ops[1][y]).real
    return out


def luders_oracle(first, second, psi):
    """Sequential outcome table via projectors and density matrices, indexed [second, first]."""
    rho = np.outer(psi, psi.conj())
    p1 = np.outer(first, first.conj())
    p0 = np.eye(3) - p1
    s1 = np.outer(second, second.conj())
    out = np.empty((2, 2))
    for col, proj in enumerate((p1, p0)):
        post = proj @ rho @ proj
        out[0, col] = np.trace(s1 @ post).real
        out[1, col] = np.trace(post).real - out[0, col]
    return out


def test_singlet_normalised():
    psi = singlet_state().amplitudes
    assert np.vdot(psi, psi).real == pytest.approx(1.0)


@pytest.mark.parametrize("gamma", np.linspace(0.0, math.pi, 13))
def test_chsh_table_closed_form(gamma):
    t = chsh_joint_dist(gamma).table
    c = math.cos(gamma)
    expected = np.array([[1 - c, 1 + c], [1 + c, 1 - c]]) / 4
    np.testing.assert_allclose(t, expected, atol=1e-14)
    assert chsh_correlation(gamma) == pytest.approx(-c, abs=1e-14)


def test_spin_table_matches_born_oracle(rng):
    for _ in range(50):
        a = rng.normal(size=3)
        b = rng.normal(size=3)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        got = spin_pair_joint_dist(
            DichotomicSpinObservable(a), DichotomicSpinObservable(b), QuantumState(psi)
        ).table
        np.testing.assert_allclose(got, born_oracle(a, b, psi), atol=1e-12)


def test_spin_observable_validation():
    with pytest.raises(DomainError):
        DichotomicSpinObservable([1.0, 1.0, 0.0])
    obs = DichotomicSpinObservable.planar(0.3)
    np.testing.assert_allclose(obs.eigenprojector(1) + obs.eigenprojector(-1), np.eye(2), atol=1e-14)
    with pytest.raises(DomainError):
        obs.eigenprojector(0)


def test_state_validation():
    with pytest.raises(DomainError):
        QuantumState([1.0, 1.0, 0.0])
    with pytest.raises(DomainError):
        QuantumState([1.0, 0.0, 0.0, 0.0, 0.0])


def test_kcbs_orthogonality_and_unit_norm(rng):
    alphas = rng.uniform(1e-4, math.pi / 4 - 1e-4, size=100)
    vecs = kcbs_vector_array(alphas)
    norms = np.linalg.norm(vecs, axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)
    for j in range(5):
        k = (j + 1) % 5
        dots = np.sum(vecs[:, j] * vecs[:, k], axis=-1)
        np.testing.assert_allclose(dots, 0.0, atol=1e-12)


def test_kcbs_overlap_symmetries(rng):
    for alpha in rng.uniform(0.01, 0.78, size=20):
        v = kcbs_vector_array(alpha)
        assert v[0] @ v[3] == pytest.approx(v[4] @ v[1], abs=1e-12)
        assert v[0] @ v[2] == pytest.approx(v[4] @ v[2], abs=1e-12)
        np.testing.assert_array_equal(v[2], [1.0, 0.0, 0.0])


def test_kcbs_third_test_probability(rng):
    for theta in rng.uniform(0, math.pi / 2, size=20):
        x3 = kcbs_vectors(0.2)[2]
        assert abs(x3.amplitude(kcbs_state(theta).amplitudes)) ** 2 == pytest.approx(
            math.sin(theta) ** 2, abs=1e-14
        )


def test_kcbs_config_validation():
    for bad in (0.0, math.pi / 4, -0.1, 1.0):
        with pytest.raises(DomainError):
            KcbsConfig(bad)


def test_sequential_tables_match_luders(rng):
    for _ in range(100):
        f, s, psi = (rng.normal(size=3) for _ in range(3))
        f, s, psi = f / np.linalg.norm(f), s / np.linalg.norm(s), psi / np.linalg.norm(psi)
        got = kcbs_sequential_joint(RankOneTest(f), RankOneTest(s), psi).table
        np.testing.assert_allclose(got, luders_oracle(f, s, psi), atol=1e-12)


def test_sequential_tables_batched_agree():
    alphas = np.linspace(0.05, 0.75, 7)
    thetas = np.linspace(0.0, math.pi / 2, 5)
    vecs = kcbs_vector_array(alphas[:, None])
    psi = np.stack([np.sin(thetas), np.cos(thetas), 0 * thetas], axis=-1)[None, :, :]
    batch = sequential_tables(vecs[..., 1, :], vecs[..., 0, :], psi)
    for i, a in enumerate(alphas):
        for k, t in enumerate(thetas):
            single = kcbs_sequential_joint(
                kcbs_vectors(a)[1], kcbs_vectors(a)[0], kcbs_state(t)
            ).table
            np.testing.assert_allclose(batch[i, k], single, atol=1e-14)


def test_compatible_tests_no_signalling(rng):
    # orthogonal tests: the marginal of either does not depend on measurement order
    for alpha in rng.uniform(0.01, 0.78, size=10):
        cfg = KcbsConfig(alpha, rng.uniform(0, math.pi / 2))
        vecs = kcbs_vectors(cfg)
        psi = cfg.state()
        for j in range(5):
            k = (j + 1) % 5
            jk = kcbs_sequential_joint(vecs[j], vecs[k], psi).table
            kj = kcbs_sequential_joint(vecs[k], vecs[j], psi).table
            np.testing.assert_allclose(jk, kj.T, atol=1e-12)
            # outcome (1, 1) is impossible for orthogonal rank-one tests
            assert jk[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_post_measurement_state():
    cfg = KcbsConfig(0.2, 0.4)
    vecs = kcbs_vectors(cfg)
    psi = cfg.state()
    after = post_measurement_state(vecs[0], psi, 0)
    assert np.linalg.norm(after.amplitudes) == pytest.approx(1.0, abs=1e-14)
    assert abs(vecs[0].amplitude(after.amplitudes)) < 1e-14
    np.testing.assert_allclose(post_measurement_state(vecs[0], psi, 1).amplitudes, vecs[0].vector)
    # the state lies along X_3 only when theta = pi/2
    x3 = kcbs_vectors(cfg)[2]
    assert post_measurement_state(x3, kcbs_state(math.pi / 2), 0) is None
    assert post_measurement_state(x3, kcbs_state(0.0), 1) is None
    with pytest.raises(DomainError):
        post_measurement_state(x3, psi, 2)


def test_kcbs_pair_correlation():
    cfg = KcbsConfig(0.2, 0.3)
    vecs = kcbs_vectors(cfg)
    psi = cfg.state().amplitudes
    # orthogonal tests never both fire, so <XY> = 1 - 2 (p(x) + p(y))
    p = [abs(v.amplitude(psi)) ** 2 for v in vecs]
    assert kcbs_pair_correlation((0, 1), cfg) == pytest.approx(1 - 2 * (p[0] + p[1]), abs=1e-12)
    assert kcbs_pair_correlation((0, 4), cfg) == pytest.approx(1 - 2 * (p[0] + p[4]), abs=1e-12)
    with pytest.raises(DomainError):
        kcbs_pair_correlation((0, 2), cfg)
