"""Curvature of metric 2-jets.

Sign convention: ``R[i, j, k, s] = g(R(d_i, d_j) d_k, d_s)`` with
``R(X, Y) = nabla_Y nabla_X - nabla_X nabla_Y``, so that the round sphere has
``R[0, 1, 0, 1] = +1`` and ``sec(v, w) = R(v, w, v, w) / |v ^ w|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import DegeneratePlane, NormalFormRequired, NotPositiveDefinite
from .jets import MetricJet2

__all__ = [
    "ChristoffelJet1",
    "CurvatureTensor",
    "Plane",
    "RelationSpec",
    "SecExtremes",
    "SearchConfig",
    "Verdict",
    "christoffel",
    "riemann",
    "riemann_normalized",
    "riemann_from_christoffel",
    "sectional",
    "curvature_operator_bounds",
    "sec_extremes",
    "relation_check",
    "symmetry_defects",
    "TOL_EQ",
]

TOL_EQ = 1e-8
DEGENERATE_TOL = 1e-12
NORMAL_FORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ChristoffelJet1:
    m: int
    gamma0: np.ndarray  # gamma0[k, i, j] = Gamma^k_ij(0)
    dgamma: np.ndarray  # dgamma[l, k, i, j] = d_l Gamma^k_ij(0)


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    m: int
    R: np.ndarray

    def maxabs(self):
        return float(np.max(np.abs(self.R))) if self.R.size else 0.0


@dataclass(frozen=True, eq=False)
class Plane:
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))


@dataclass(frozen=True)
class RelationSpec:
    a: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")


@dataclass(frozen=True)
class SecExtremes:
    min_sec: float
    max_sec: float
    certified: bool
    bracket_low: float
    bracket_high: float


@dataclass(frozen=True)
class SearchConfig:
    """Multi-start settings for the extremal plane search in dimension >= 4."""

    n_starts: int = 256
    iterations: int = 64
    step_tol: float = 1e-10
    seed: int = 0


@dataclass(frozen=True)
class Verdict:
    member: bool
    certified: bool
    extremes: SecExtremes
    spec: RelationSpec = field(default_factory=lambda: RelationSpec(0.0))


def _sym(a, i, j):
    return 0.5 * (a + np.swapaxes(a, i, j))


def christoffel(jet: MetricJet2) -> ChristoffelJet1:
    """Christoffel symbols at the origin and their first derivatives."""
    try:
        ginv = np.linalg.inv(jet.g0)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("g0 is singular") from None
    dg, d2g = jet.dg, jet.d2g
    # first kind: low[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    gamma0 = np.einsum("kl,lij->kij", ginv, low)
    # d_p low[l, i, j]
    dlow = 0.5 * (
        np.einsum("pijl->plij", d2g) + np.einsum("pjil->plij", d2g) - d2g
    )
    # d_p g^{kl} = -g^{ka} d_p g_ab g^{bl}
    dginv = -np.einsum("ka,pab,bl->pkl", ginv, dg, ginv)
    dgamma = np.einsum("pkl,lij->pkij", dginv, low) + np.einsum("kl,plij->pkij", ginv, dlow)
    return ChristoffelJet1(jet.m, _sym(gamma0, 1, 2), _sym(dgamma, 2, 3))


def riemann_from_christoffel(g0, gamma0, dgamma) -> np.ndarray:
    """``R[i,j,k,s]`` from Christoffel data: g_sb (d_j G^b_ik - d_i G^b_jk + G^a_ik G^b_ja - G^a_jk G^b_ia)."""
    t = (
        np.einsum("jbik->ijkb", dgamma)
        - np.einsum("ibjk->ijkb", dgamma)
        + np.einsum("aik,bja->ijkb", gamma0, gamma0)
        - np.einsum("ajk,bia->ijkb", gamma0, gamma0)
    )
    return np.einsum("sb,ijkb->ijks", g0, t)


def riemann(jet: MetricJet2) -> CurvatureTensor:
    ch = christoffel(jet)
    return CurvatureTensor(jet.m, riemann_from_christoffel(jet.g0, ch.gamma0, ch.dgamma))


def _check_normal_form(jet, tol=NORMAL_FORM_TOL):
    dev_g = float(np.max(np.abs(jet.g0 - np.eye(jet.m))))
    dev_d = float(np.max(np.abs(jet.dg))) if jet.dg.size else 0.0
    if dev_g > tol or dev_d > tol:
        raise NormalFormRequired(
            f"jet is not in normal form: |g0 - I| = {dev_g:.3g}, |dg| = {dev_d:.3g}"
        )


def riemann_normalized(jet: MetricJet2) -> CurvatureTensor:
    """Curvature of a jet with ``g0 = I`` and ``dg = 0`` from second derivatives alone."""
    _check_normal_form(jet)
    h = jet.d2g  # h[a, b, c, d] = d_a d_b g_cd
    R = 0.5 * (
        np.einsum("jksi->ijks", h)
        - np.einsum("jsik->ijks", h)
        - np.einsum("iksj->ijks", h)
        + np.einsum("isjk->ijks", h)
    )
    return CurvatureTensor(jet.m, R)


def symmetry_defects(R) -> dict:
    """Max-abs residuals of the four algebraic curvature identities."""
    R = getattr(R, "R", R)
    return {
        "antisym_ij": float(np.max(np.abs(R + np.einsum("jiks->ijks", R)))),
        "antisym_ks": float(np.max(np.abs(R + np.einsum("ijsk->ijks", R)))),
        "pair": float(np.max(np.abs(R - np.einsum("ksij->ijks", R)))),
        "bianchi": float(
            np.max(np.abs(R + np.einsum("jkis->ijks", R) + np.einsum("kijs->ijks", R)))
        ),
    }


def _gram(g0, v, w):
    return (v @ g0 @ v) * (w @ g0 @ w) - (v @ g0 @ w) ** 2


def _rvwvw(R, v, w):
    return float(np.einsum("ijks,i,j,k,s->", R, v, w, v, w))


def sectional(jet: MetricJet2, p, tensor: CurvatureTensor | None = None) -> float:
    """Sectional curvature of the plane spanned by ``p.v`` and ``p.w`` (a Plane or pair)."""
    v, w = (p.v, p.w) if isinstance(p, Plane) else p
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    den = _gram(jet.g0, v, w)
    if not den > DEGENERATE_TOL * (v @ v) * (w @ w):
        raise DegeneratePlane("vectors do not span a plane")
    R = (tensor or riemann(jet)).R
    return _rvwvw(R, v, w) / den


# ---------------------------------------------------------------------------
# extremes over planes


def _bivector_forms(R, g0):
    pairs = list(combinations(range(g0.shape[0]), 2))
    I = np.array([p[0] for p in pairs])
    J = np.array([p[1] for p in pairs])
    B = R[I[:, None], J[:, None], I[None, :], J[None, :]]
    G = g0[I[:, None], I[None, :]] * g0[J[:, None], J[None, :]] - g0[I[:, None], J[None, :]] * g0[J[:, None], I[None, :]]
    return 0.5 * (B + B.T), G


def curvature_operator_bounds(jet: MetricJet2, tensor: CurvatureTensor | None = None):
    """Extreme eigenvalues of the curvature form on 2-vectors.

    Every sectional curvature lies between the two returned values.
    """
    R = (tensor or riemann(jet)).R
    B, G = _bivector_forms(R, jet.g0)
    lam = scipy.linalg.eigh(B, G, eigvals_only=True)
    return float(lam[0]), float(lam[-1])


def _orthonormal_tensor(R, g0):
    """R in a g0-orthonormal frame (columns of inv(chol(g0)).T)."""
    c = np.linalg.cholesky(g0)
    E = scipy.linalg.solve_triangular(c, np.eye(len(g0)), lower=True).T
    return np.einsum("ijks,ia,jb,kc,sd->abcd", R, E, E, E, E)


def _random_frames(m, n, rng):
    x = rng.standard_normal((n, m))
    y = rng.standard_normal((n, m))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y -= np.sum(x * y, axis=1, keepdims=True) * x
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return x, y


def _refine(Rh, x, y, sign, iterations, tol):
    """Alternating exact line-search on orthonormal frames.

    With one vector fixed, sec is a quadratic form in the other restricted to
    the orthogonal complement; each half-step jumps to its extremal
    eigenvector, so the objective is monotone.
    """
    m = x.shape[1]
    eye = np.eye(m)
    shift = 4.0 * float(np.sum(np.abs(Rh))) + 1.0
    vals = sign * np.einsum("abcd,na,nb,nc,nd->n", Rh, x, y, x, y)
    for _ in range(iterations):
        for _half in range(2):
            A = sign * np.einsum("abcd,nb,nd->nac", Rh, y, y)
            A = 0.5 * (A + np.swapaxes(A, 1, 2))
            P = eye - y[:, :, None] * y[:, None, :]
            M = P @ A @ P - shift * y[:, :, None] * y[:, None, :]
            _, vecs = np.linalg.eigh(M)
            x_new = vecs[:, :, -1]
            x, y = y, x_new
        new = sign * np.einsum("abcd,na,nb,nc,nd->n", Rh, x, y, x, y)
        done = np.max(np.abs(new - vals)) <= tol
        vals = new
        if done:
            break
    return sign * vals


def search_extremes(jet: MetricJet2, cfg: SearchConfig = SearchConfig(), tensor=None):
    """Multi-start local extremization of sec over orthonormal 2-frames.

    Returns ``(min, max)`` realized by actual planes.
    """
    m = jet.m
    R = (tensor or riemann(jet)).R
    Rh = _orthonormal_tensor(R, jet.g0)
    rng = np.random.default_rng(cfg.seed)
    x, y = _random_frames(m, cfg.n_starts, rng)
    coord = list(combinations(range(m), 2))
    eye = np.eye(m)
    x = np.vstack([eye[[p[0] for p in coord]], x])
    y = np.vstack([eye[[p[1] for p in coord]], y])
    hi = _refine(Rh, x, y, 1.0, cfg.iterations, cfg.step_tol)
    lo = _refine(Rh, x, y, -1.0, cfg.iterations, cfg.step_tol)
    return float(np.min(lo)), float(np.max(hi))


def sec_extremes(jet: MetricJet2, cfg: SearchConfig = SearchConfig(), tensor=None) -> SecExtremes:
    """Minimal and maximal sectional curvature of ``jet``.

    Exact (``certified=True``) for m <= 3, where every 2-vector is a plane;
    a seeded multi-start search otherwise.
    """
    tensor = tensor or riemann(jet)
    if jet.m < 2:
        raise DegeneratePlane("no planes exist in dimension 1")
    lo, hi = curvature_operator_bounds(jet, tensor)
    if jet.m <= 3:
        return SecExtremes(lo, hi, True, lo, hi)
    smin, smax = search_extremes(jet, cfg, tensor)
    return SecExtremes(smin, smax, False, lo, hi)


def relation_check(
    jet: MetricJet2,
    spec: RelationSpec,
    cfg: SearchConfig = SearchConfig(),
    tol_eq: float = TOL_EQ,
) -> Verdict:
    """Decide whether every sectional curvature of ``jet`` lies in (a - delta, a + delta).

    For ``delta == 0`` membership means ``|sec - a| <= tol_eq`` on all planes.
    """
    ext = sec_extremes(jet, cfg)
    a, delta = spec.a, spec.delta
    if delta == 0:
        inside = lambda lo, hi: abs(lo - a) <= tol_eq and abs(hi - a) <= tol_eq
        outside = lambda lo, hi: abs(lo - a) > tol_eq or abs(hi - a) > tol_eq
    else:
        inside = lambda lo, hi: a - delta < lo and hi < a + delta
        outside = lambda lo, hi: lo < a - delta or hi > a + delta

    if inside(ext.bracket_low, ext.bracket_high):
        return Verdict(True, True, ext, spec)
    # min_sec/max_sec are attained by actual planes, certified or not
    if outside(ext.min_sec, ext.max_sec):
        return Verdict(False, True, ext, spec)
    if ext.certified:
        return Verdict(inside(ext.min_sec, ext.max_sec), True, ext, spec)
    return Verdict(inside(ext.min_sec, ext.max_sec), False, ext, spec)
