"""Frames, exponential-map jets and the normalization maps on the jet fiber."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvature import christoffel
from .diffeo import DiffeoJet3, compose, invert, linear_jet, make_diffeo_jet, pullback_arrays, pullback_metric_jet
from .errors import LeftPositivityDomain, NotPositiveDefinite, NormalFormRequired, SingularJet
from .jets import MetricJet2, fiber_dim, pack_arrays, taylor_eval, unpack_arrays, validate_jet

__all__ = [
    "Frame",
    "NormalizationOperator",
    "gram_schmidt",
    "exp_jet3",
    "geodesic_integrate",
    "normalize",
    "normalization_operator",
]

NORMAL_FORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Frame:
    m: int
    E: np.ndarray


def gram_schmidt(G0, B_ref=None) -> Frame:
    """Orthonormalize the columns of ``B_ref`` with respect to the inner product ``G0``.

    Classical Gram-Schmidt in column order, with one re-orthogonalization
    pass. For ``B_ref = I`` the frame is upper triangular with a positive
    diagonal.
    """
    G0 = np.asarray(G0, dtype=float)
    m = G0.shape[0]
    B = np.eye(m) if B_ref is None else np.asarray(B_ref, dtype=float)
    if abs(np.linalg.det(B)) <= 1e-14:
        raise SingularJet("reference basis is not invertible")
    E = np.zeros((m, m))
    for j in range(m):
        u = B[:, j].copy()
        for _ in range(2):
            coef = E[:, :j].T @ (G0 @ u)
            u = u - E[:, :j] @ coef
        nrm2 = u @ G0 @ u
        if not nrm2 > 0:
            raise NotPositiveDefinite("inner product is not positive definite on the reference basis")
        E[:, j] = u / np.sqrt(nrm2)
    return Frame(m, E)


def exp_jet3(jet: MetricJet2) -> DiffeoJet3:
    """3-jet at 0 of ``v -> exp_0(v)`` for the Taylor metric of ``jet``.

    From the geodesic equation x'' = -Gamma(x)(x', x'):
    x''(0) = -Gamma0(v, v) and
    x'''(0) = -dGamma(v; v, v) + 2 Gamma0(Gamma0(v, v), v).
    """
    ch = christoffel(jet)
    m = jet.m
    J2 = -ch.gamma0
    # raw[k, a, b, c] = -dGamma[a, k, b, c] + 2 Gamma^k_{p c} Gamma^p_{a b}
    raw = -np.einsum("akbc->kabc", ch.dgamma) + 2.0 * np.einsum("kpc,pab->kabc", ch.gamma0, ch.gamma0)
    return make_diffeo_jet(np.eye(m), J2, raw)


def _christoffel_at(g, dgx):
    ginv = np.linalg.inv(g)
    low = 0.5 * (np.einsum("ijl->lij", dgx) + np.einsum("jil->lij", dgx) - dgx)
    return np.einsum("kl,lij->kij", ginv, low)


def geodesic_integrate(jet: MetricJet2, v, steps: int = 256, metric=None):
    """Time-1 point of the geodesic from 0 with initial velocity ``v`` (classical RK4).

    By default Christoffel symbols come from the degree-2 Taylor metric of
    ``jet``. ``metric`` may be any callable ``x -> (g(x), dg(x))`` with
    ``dg[k, i, j] = d_k g_ij``, which lets the integrator run on an exact
    metric field instead.
    """
    v = np.asarray(v, dtype=float)
    if metric is None:
        metric = lambda x: taylor_eval(jet, x, order=1)
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be positive")
    h = 1.0 / steps

    def rhs(state, step):
        x, xd = state
        g, dgx = metric(x)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise LeftPositivityDomain(step) from None
        gam = _christoffel_at(g, dgx)
        return np.array([xd, -np.einsum("kij,i,j->k", gam, xd, xd)])

    y = np.array([np.zeros_like(v), v])
    for n in range(steps):
        k1 = rhs(y, n)
        k2 = rhs(y + 0.5 * h * k1, n)
        k3 = rhs(y + 0.5 * h * k2, n)
        k4 = rhs(y + h * k3, n)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    g_end, _ = metric(y[0])
    try:
        np.linalg.cholesky(g_end)
    except np.linalg.LinAlgError:
        raise LeftPositivityDomain(steps) from None
    return y[0]


def coordinate_change(jet: MetricJet2, B_ref=None) -> DiffeoJet3:
    """Jet of ``y -> exp_0(E y)`` with ``E`` the Gram-Schmidt frame of ``jet.g0``."""
    frame = gram_schmidt(jet.g0, B_ref)
    return compose(exp_jet3(jet), linear_jet(frame.E))


def _snap_normal_form(jet_arrays, m, tol):
    g0, dg, d2g = jet_arrays
    dev_g = float(np.max(np.abs(g0 - np.eye(m))))
    dev_d = float(np.max(np.abs(dg)))
    if dev_g > tol or dev_d > tol:
        raise NormalFormRequired(
            f"normalization missed normal form: |g0 - I| = {dev_g:.3g}, |dg| = {dev_d:.3g}"
        )
    return validate_jet(m=m, g0=np.eye(m), dg=np.zeros((m,) * 3), d2g=d2g)


def normalize(jet: MetricJet2, B_ref=None, tol: float = NORMAL_FORM_TOL):
    """Express ``jet`` in normal coordinates centred at 0.

    Returns ``(normalized_jet, F)`` where ``F`` is the coordinate change
    ``y -> exp_0(E y)``. The normalized jet has ``g0 = I`` and ``dg = 0``
    exactly (after a tolerance check).
    """
    F = coordinate_change(jet, B_ref)
    arrays = pullback_arrays(F, jet.g0, jet.dg, jet.d2g)
    return _snap_normal_form(arrays, jet.m, tol), F


class NormalizationOperator:
    """The linear map ``sigma -> F* sigma`` on packed fiber coordinates, F fixed by ``jet_t``."""

    def __init__(self, jet_t: MetricJet2, B_ref=None):
        self.m = jet_t.m
        self.F = coordinate_change(jet_t, B_ref)
        self.F_inv = invert(self.F)
        self._matrix = None
        self._inverse = None

    def __call__(self, sigma: MetricJet2) -> MetricJet2:
        return pullback_metric_jet(self.F, sigma)

    def apply_inverse(self, sigma: MetricJet2) -> MetricJet2:
        return pullback_metric_jet(self.F_inv, sigma)

    def apply_packed(self, coords):
        arrays = unpack_arrays(self.m, coords)
        return pack_arrays(*pullback_arrays(self.F, *arrays))

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            n = fiber_dim(self.m)
            cols = [self.apply_packed(e) for e in np.eye(n)]
            self._matrix = np.column_stack(cols)
            self._matrix.setflags(write=False)
        return self._matrix

    @property
    def inverse_matrix(self) -> np.ndarray:
        if self._inverse is None:
            M = self.matrix
            try:
                inv = np.linalg.inv(M)
            except np.linalg.LinAlgError:
                raise SingularJet("normalization operator is singular") from None
            resid = float(np.max(np.abs(inv @ M - np.eye(len(M)))))
            if resid > 1e-8:
                raise SingularJet(f"normalization operator inverse residual {resid:.3g}")
            inv.setflags(write=False)
            self._inverse = inv
        return self._inverse


def normalization_operator(jet_t: MetricJet2, B_ref=None) -> NormalizationOperator:
    return NormalizationOperator(jet_t, B_ref)
