import numpy as np
import pytest

from pinchjet.curvature import RelationSpec, relation_check, riemann_normalized, sec_extremes
from pinchjet.diffeo import linear_jet, pullback_metric_jet, random_diffeo_jet
from pinchjet.errors import DimensionTooSmall
from pinchjet.jets import euclidean_jet
from pinchjet.models import conformal_jet, perturbed_jet, random_fa_sample


def test_conformal_zero_is_euclidean():
    assert conformal_jet(0.0, 3).allclose(euclidean_jet(3), atol=0)


def test_conformal_jet_blocks():
    jet = conformal_jet(1.0, 2)
    I = np.eye(2)
    np.testing.assert_array_equal(jet.d2g, -np.einsum("kl,ij->klij", I, I))
    assert riemann_normalized(jet).R[0, 1, 0, 1] == 1.0


def test_conformal_m3_certified():
    e = sec_extremes(conformal_jet(-4.0, 3))
    assert e.certified and e.min_sec == pytest.approx(-4.0, abs=1e-12) and e.max_sec == pytest.approx(-4.0, abs=1e-12)


def test_conformal_too_small():
    with pytest.raises(DimensionTooSmall):
        conformal_jet(1.0, 1)


def test_fa_sample_amplitude_zero():
    assert random_fa_sample(2.0, 3, 5, 0.0).allclose(conformal_jet(2.0, 3), atol=0)


def test_fa_sample_constant_curvature():
    jet = random_fa_sample(-1.0, 3, 7, 0.2)
    assert np.max(np.abs(jet.g0 - np.eye(3))) > 1e-3 and np.max(np.abs(jet.dg)) > 1e-3
    e = sec_extremes(jet)
    assert e.certified and abs(e.min_sec + 1) <= 1e-8 and abs(e.max_sec + 1) <= 1e-8
    again = pullback_metric_jet(random_diffeo_jet(3, 8, 0.2), jet)
    e = sec_extremes(again)
    assert abs(e.min_sec + 1) <= 1e-8 and abs(e.max_sec + 1) <= 1e-8


def test_fa_sample_deterministic():
    assert random_fa_sample(0.5, 3, 3).allclose(random_fa_sample(0.5, 3, 3), atol=0)


def test_fa_sample_under_dilation_keeps_curvature():
    jet = pullback_metric_jet(linear_jet(3.0 * np.eye(2)), random_fa_sample(2.0, 2, 1))
    e = sec_extremes(jet)
    assert e.min_sec == pytest.approx(2.0, abs=1e-8)


def test_perturbation_zero_and_size():
    base = conformal_jet(1.0, 3)
    assert perturbed_jet(base, 0.0, 1) is base
    p = perturbed_jet(base, 1e-3, 1)
    assert np.max(np.abs(p.d2g - base.d2g)) == pytest.approx(1e-3, rel=1e-12)
    np.testing.assert_array_equal(p.g0, base.g0)
    np.testing.assert_array_equal(p.dg, base.dg)


def test_perturbation_membership():
    base = conformal_jet(1.0, 3)
    v = relation_check(perturbed_jet(base, 1e-3, 0), RelationSpec(1.0, 0.1))
    assert v.member and v.certified
    for seed in range(5):
        assert not relation_check(perturbed_jet(base, 10.0, seed), RelationSpec(1.0, 0.1)).member


@pytest.mark.parametrize("seed", range(5))
def test_monotone_pinching(seed):
    base = conformal_jet(1.0, 3)
    devs = []
    for eps in (0.0, 1e-4, 1e-3, 1e-2):
        e = sec_extremes(perturbed_jet(base, eps, seed))
        devs.append(max(abs(e.min_sec - 1), abs(e.max_sec - 1)))
    assert all(b >= a for a, b in zip(devs, devs[1:]))
