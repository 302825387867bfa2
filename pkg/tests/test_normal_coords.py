import numpy as np
import pytest

from pinchjet.curvature import christoffel, riemann_normalized, sec_extremes, sectional
from pinchjet.diffeo import diffeo_eval, identity_jet, pullback_metric_jet
from pinchjet.errors import LeftPositivityDomain, NotPositiveDefinite
from pinchjet.jets import euclidean_jet, flatten, interpolate_jets, validate_jet
from pinchjet.models import conformal_jet, conformal_metric_field, random_fa_sample, random_jet
from pinchjet.normal_coords import (
    exp_jet3,
    geodesic_integrate,
    gram_schmidt,
    normalization_operator,
    normalize,
)


def test_gram_schmidt_examples():
    np.testing.assert_array_equal(gram_schmidt(np.eye(3)).E, np.eye(3))
    np.testing.assert_allclose(gram_schmidt(np.diag([4.0, 9.0])).E, np.diag([0.5, 1 / 3]), atol=1e-15)
    G = np.array([[2.0, 1.0], [1.0, 2.0]])
    E = gram_schmidt(G).E
    np.testing.assert_allclose(E.T @ G @ E, np.eye(2), atol=1e-12)
    assert E[1, 0] == 0.0 and np.all(np.diag(E) > 0)


@pytest.mark.parametrize("seed", range(10))
def test_gram_schmidt_orthonormal(seed):
    jet = random_jet(4, seed, spread=0.9)
    B = np.eye(4) + 0.3 * np.random.default_rng(seed).standard_normal((4, 4))
    E = gram_schmidt(jet.g0, B).E
    np.testing.assert_allclose(E.T @ jet.g0 @ E, np.eye(4), atol=1e-12)


def test_gram_schmidt_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        gram_schmidt(np.diag([1.0, -1.0]))


def test_frame_continuity_along_interpolation():
    psi, tau = random_jet(3, 1, spread=0.8), random_fa_sample(1.0, 3, 2)
    ts = np.linspace(0, 1, 101)
    frames = [gram_schmidt(interpolate_jets(psi, tau, t).g0).E for t in ts]
    steps = [np.max(np.abs(b - a)) for a, b in zip(frames, frames[1:])]
    # derivative estimate from the coarse endpoints
    slope = np.max(np.abs(frames[-1] - frames[0]))
    assert max(steps) <= 5 * (ts[1] - ts[0]) * max(slope, 1.0)
    assert all(np.all(np.diag(E) > 0) for E in frames)


def test_exp_jet_euclidean():
    assert exp_jet3(euclidean_jet(3)).allclose(identity_jet(3), atol=0)


@pytest.mark.parametrize("seed", range(3))
def test_exp_jet_second_order_is_minus_gamma(seed):
    rng = np.random.default_rng(seed)
    dg = rng.uniform(-0.3, 0.3, (3, 3, 3))
    dg = 0.5 * (dg + np.swapaxes(dg, 1, 2))
    jet = validate_jet(m=3, g0=np.eye(3), dg=dg)
    F = exp_jet3(jet)
    np.testing.assert_allclose(F.J2, -christoffel(jet).gamma0, atol=1e-15)
    # oracle: even part of the integrated geodesic, Richardson-extrapolated
    u = rng.standard_normal(3)
    u /= np.linalg.norm(u)

    def quad(eps):
        return (geodesic_integrate(jet, eps * u) + geodesic_integrate(jet, -eps * u)) / (2 * eps**2)

    est = (4 * quad(0.01) - quad(0.02)) / 3
    np.testing.assert_allclose(est, 0.5 * np.einsum("kij,i,j->k", F.J2, u, u), atol=1e-6)


@pytest.mark.parametrize("a", [1.0, 0.3])
def test_exp_jet_conformal_radial(a):
    F = exp_jet3(conformal_jet(a, 3))
    assert not F.J2.any()
    # rho(r) = (2/sqrt a) tan(sqrt(a) r / 2) = r + a r^3 / 12 + O(r^5)
    u = np.array([0.0, 0.6, 0.8])
    np.testing.assert_allclose(np.einsum("kijl,i,j,l->k", F.J3, u, u, u) / 6, (a / 12) * u, atol=1e-15)
    r = 0.05
    rho = 2 / np.sqrt(a) * np.tan(np.sqrt(a) * r / 2)
    assert np.linalg.norm(diffeo_eval(F, r * u)) == pytest.approx(rho, abs=1e-7)


def test_geodesic_euclidean():
    # zero right-hand side; only summation rounding over the 256 steps remains
    np.testing.assert_allclose(geodesic_integrate(euclidean_jet(2), [0.3, -0.2]), [0.3, -0.2], rtol=0, atol=1e-14)


def test_geodesic_conformal_closed_form():
    x = geodesic_integrate(conformal_jet(1.0, 2), [0.3, 0.0], 256, metric=conformal_metric_field(1.0, 2))
    assert np.linalg.norm(x) == pytest.approx(2 * np.tan(0.15), abs=1e-8)
    assert x[1] == 0.0


def test_geodesic_taylor_metric_differs_at_fifth_order():
    # the degree-2 Taylor metric (1 - |x|^2/2) is not the conformal metric
    x = geodesic_integrate(conformal_jet(1.0, 2), [0.3, 0.0], 256)
    gap = abs(np.linalg.norm(x) - 2 * np.tan(0.15))
    assert 1e-6 < gap < 1e-4


@pytest.mark.parametrize("seed", range(3))
def test_geodesic_rk4_order(seed):
    jet = random_jet(2, seed)
    v = np.random.default_rng(seed).standard_normal(2) * 0.8
    ref = geodesic_integrate(jet, v, 4096)
    errs = [np.linalg.norm(geodesic_integrate(jet, v, n) - ref) for n in (8, 16, 32)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(10 < r < 22 for r in ratios)


def test_geodesic_leaves_positivity():
    with pytest.raises(LeftPositivityDomain) as info:
        geodesic_integrate(conformal_jet(1.0, 2), [3.0, 0.0], 64)
    assert info.value.step >= 0


@pytest.mark.parametrize("seed", range(20))
def test_exp_jet_fourth_order_residual(seed):
    m = 2 + seed % 2
    jet = random_jet(m, seed)
    F = exp_jet3(jet)
    u = np.random.default_rng(1000 + seed).standard_normal(m)
    u /= np.linalg.norm(u)
    rs = np.array([0.1, 0.05, 0.025])
    res = [np.linalg.norm(diffeo_eval(F, r * u) - geodesic_integrate(jet, r * u)) for r in rs]
    assert np.polyfit(np.log(rs), np.log(res), 1)[0] >= 3.7


def test_normalize_euclidean():
    n, F = normalize(euclidean_jet(3))
    assert n.allclose(euclidean_jet(3), atol=0)
    assert F.allclose(identity_jet(3), atol=0)


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("a", [1.0, -2.0])
def test_normalize_conformal_pattern(m, a):
    I = np.eye(m)
    expected = -(a / 3) * (
        2 * np.einsum("kl,ij->klij", I, I) - np.einsum("ki,lj->klij", I, I) - np.einsum("kj,li->klij", I, I)
    )
    n, _ = normalize(conformal_jet(a, m))
    np.testing.assert_allclose(n.d2g, expected, atol=1e-14)
    assert sectional(n, ([1] + [0] * (m - 1), [0, 1] + [0] * (m - 2))) == pytest.approx(a, abs=1e-13)


@pytest.mark.parametrize("seed", range(10))
def test_normalize_random(seed):
    m = 2 + seed % 2
    jet = random_jet(m, seed)
    n, F = normalize(jet)
    np.testing.assert_array_equal(n.g0, np.eye(m))
    assert not n.dg.any()
    raw = pullback_metric_jet(F, jet)
    assert np.max(np.abs(raw.g0 - np.eye(m))) <= 1e-10 and np.max(np.abs(raw.dg)) <= 1e-10
    riemann_normalized(n)
    e0, e1 = sec_extremes(jet), sec_extremes(n)
    assert e1.min_sec == pytest.approx(e0.min_sec, abs=1e-8)
    assert e1.max_sec == pytest.approx(e0.max_sec, abs=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_normalize_idempotent(seed):
    jet = random_jet(3, seed)
    n, _ = normalize(jet)
    n2, F2 = normalize(n)
    assert F2.allclose(identity_jet(3), atol=1e-9)
    assert n2.allclose(n, atol=1e-9)


def test_operator_euclidean_is_identity():
    op = normalization_operator(euclidean_jet(2))
    np.testing.assert_allclose(op.matrix, np.eye(len(op.matrix)), atol=0)


@pytest.mark.parametrize("seed", range(5))
def test_operator_two_paths(seed):
    m = 2 + seed % 2
    jet_t = random_jet(m, seed)
    op = normalization_operator(jet_t)
    for s in range(3):
        sigma = random_jet(m, 100 + s)
        direct = flatten(op(sigma)).coords
        np.testing.assert_allclose(op.matrix @ flatten(sigma).coords, direct, atol=1e-11)
        back = op.inverse_matrix @ direct
        np.testing.assert_allclose(back, flatten(sigma).coords, atol=1e-10)
        np.testing.assert_allclose(flatten(op.apply_inverse(op(sigma))).coords, flatten(sigma).coords, atol=1e-10)
    np.testing.assert_allclose(op.inverse_matrix @ op.matrix, np.eye(len(op.matrix)), atol=1e-10)
    out = op(jet_t)
    assert np.max(np.abs(out.g0 - np.eye(m))) <= 1e-10 and np.max(np.abs(out.dg)) <= 1e-10
