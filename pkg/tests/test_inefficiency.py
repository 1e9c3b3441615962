import math

import numpy as np
import pytest

from qentropic.entropy import DomainError, JointDist, joint_entropy, tsallis_entropy
from qentropic.inefficiency import (
    EtaReport,
    InefficiencyModel,
    ModelKind,
    RatioUndefinedError,
    deform_joint,
    deform_marginal,
    deformed_joint_form,
    ratio_linear_fit,
    single_detector_cq,
    single_detector_report,
    two_detector_delta,
    two_detector_report,
)
from qentropic.quantum import KcbsConfig
from qentropic.scenarios import kcbs_cq

from conftest import random_table, tsallis_ref

# (alpha, theta) of the published maximal violations, one per tabulated q
MAX_CONFIGS = {
    1.0: (0.1698, 0.2366),
    1.1: (0.1802, 0.2684),
    1.2: (0.1880, 0.2943),
    1.4: (0.1987, 0.3327),
    1.6: (0.2051, 0.3585),
    1.8: (0.2085, 0.3761),
    2.0: (0.2099, 0.3880),
    2.5: (0.2067, 0.4014),
    3.0: (0.1982, 0.3996),
    5.0: (0.1557, 0.3345),
    8.0: (0.1205, 0.2639),
    11.0: (0.1017, 0.2247),
}
ETAS = (0.9, 0.99, 0.999)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_deform_joint_mass_and_marginals(kind, rng):
    for _ in range(50):
        t = random_table(rng, (2, 3), sparsity=0.3)
        eta = rng.uniform(0, 1)
        out = deform_joint(t, InefficiencyModel(kind, eta)).table
        assert out.shape == (3, 4)
        assert out.sum() == pytest.approx(1.0, abs=1e-14)
        if kind is ModelKind.TWO:
            # each side sees its own deformed marginal
            np.testing.assert_allclose(out.sum(axis=1), deform_marginal(t.sum(axis=1), eta).probs, atol=1e-14)
            np.testing.assert_allclose(out.sum(axis=0), deform_marginal(t.sum(axis=0), eta).probs, atol=1e-14)


def test_deform_joint_rejects_inconsistent_marginals():
    t = np.full((2, 2), 0.25)
    with pytest.raises(DomainError):
        deform_joint(t, InefficiencyModel("two", 0.9), marg_a=[0.9, 0.1])
    out = deform_joint(t, InefficiencyModel("two", 0.9), marg_a=[0.5, 0.5])
    assert out.shape == (3, 3)


def test_model_validation():
    with pytest.raises(ValueError):
        InefficiencyModel("three", 0.9)
    with pytest.raises(DomainError):
        InefficiencyModel("two", 1.2)


@pytest.mark.parametrize("q", [0.5, 1.0, 2.0, 5.0])
def test_deformed_entropies_match_direct_evaluation(q, rng):
    # entropies of explicitly built deformed tables versus the term-by-term oracle
    for _ in range(20):
        t = random_table(rng, (2, 2))
        eta = rng.uniform(0.5, 1)
        out = deform_joint(t, InefficiencyModel("two", eta)).table
        assert joint_entropy(out, q) == pytest.approx(tsallis_ref(out, q), abs=1e-12)


@pytest.mark.parametrize("q", sorted(MAX_CONFIGS))
@pytest.mark.parametrize("eta", ETAS)
def test_single_detector_constructive_and_algebraic(q, eta):
    cfg = KcbsConfig(*MAX_CONFIGS[q])
    c = kcbs_cq(cfg, q).c_q
    built = deformed_joint_form(cfg, InefficiencyModel("single", eta), q)
    assert built == pytest.approx(eta**q * c, abs=1e-10)
    assert single_detector_cq(c, eta, q) == pytest.approx(eta**q * c, abs=1e-15)
    rep = single_detector_report(cfg, eta, q)
    assert rep.c_q_eta == pytest.approx(built, abs=1e-10)
    assert rep.ratio == 0.0


@pytest.mark.parametrize("q", sorted(MAX_CONFIGS))
@pytest.mark.parametrize("eta", ETAS)
def test_two_detector_constructive_and_algebraic(q, eta):
    cfg = KcbsConfig(*MAX_CONFIGS[q])
    built = deformed_joint_form(cfg, InefficiencyModel("two", eta), q)
    rep = two_detector_report(cfg, eta, q)
    assert rep.c_q_eta == pytest.approx(built, abs=1e-10)
    assert rep.ratio == pytest.approx(abs(rep.delta_q) / (eta ** (2 * q) * rep.c_q))


def test_perfect_detectors():
    cfg = KcbsConfig(0.2099, 0.3880)
    for q in (1.0, 2.0):
        rep = two_detector_report(cfg, 1.0, q)
        assert rep.delta_q == 0.0 and rep.ratio == 0.0
        assert rep.c_q_eta == pytest.approx(rep.c_q, abs=1e-15)
        for kind in ModelKind:
            built = deformed_joint_form(cfg, InefficiencyModel(kind, 1.0), q)
            assert built == pytest.approx(rep.c_q, abs=1e-12)


def test_delta_formula_by_hand():
    h = [0.3, 0.4, 0.5]
    eta, q = 0.8, 2.0
    hq = (1 - eta**2 - 0.2**2) / (q - 1)
    expected = 0.64 * (0.64 + 2 * 0.04 - 1) * 1.2 + 3 * (0.64 + 0.04) * hq
    assert two_detector_delta(h, eta, q) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("q", [1.0, 1.5, 2.0, 3.0, 5.0, 11.0])
def test_delta_positive_away_from_one(q):
    cfg = KcbsConfig(0.2, 0.35)
    for eta in np.arange(0.001, 1.0, 0.001):
        assert two_detector_report(cfg, eta, q).delta_q > 0


def test_ratio_undefined_without_violation():
    cfg = KcbsConfig(0.1885, 0.0)
    with pytest.raises(RatioUndefinedError) as info:
        two_detector_report(cfg, 0.99, 1.0)
    assert isinstance(info.value.report, EtaReport)
    assert info.value.report.ratio is None
    with pytest.raises(RatioUndefinedError):
        two_detector_report(KcbsConfig(0.2099, 0.3880), 0.0, 2.0)


def test_ratio_linear_fit():
    cfg = KcbsConfig(*MAX_CONFIGS[2.0])
    fit = ratio_linear_fit(cfg, 2.0)
    assert fit.defined
    assert fit.max_rel_deviation < 0.05
    assert fit.slope == pytest.approx(100 * fit.ratios[0], rel=0.05)
    flat = ratio_linear_fit(cfg, 2.0, (1.0,))
    assert not flat.defined and flat.ratios == (0.0,)
    with pytest.raises(DomainError):
        ratio_linear_fit(cfg, 2.0, (0.5, 0.9))


def test_deform_marginal():
    d = deform_marginal([0.25, 0.75], 0.8)
    np.testing.assert_allclose(d.probs, [0.2, 0.6, 0.2])
    assert tsallis_entropy(d, 1.0) == pytest.approx(
        -(0.2 * math.log(0.2) * 2 + 0.6 * math.log(0.6))
    )
