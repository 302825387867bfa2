"""2-jets of Riemannian metrics at the origin of a chart.

A jet is stored as full (redundant) arrays::

    g0[i, j]         = g_ij(0)
    dg[k, i, j]      = d_k g_ij(0)
    d2g[l, k, i, j]  = d_l d_k g_ij(0)

The packed :class:`FiberVector` form keeps one entry per independent
coordinate and is used for linear maps on the fiber and for serialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatch,
    LengthMismatch,
    NotPositiveDefinite,
    ShapeMismatch,
    SymmetryViolation,
)

__all__ = [
    "MetricJet2",
    "FiberVector",
    "validate_jet",
    "euclidean_jet",
    "interpolate_jets",
    "taylor_eval",
    "flatten",
    "unflatten",
    "fiber_dim",
    "pack_arrays",
    "unpack_arrays",
    "jet_to_dict",
    "jet_from_dict",
    "dumps_jet",
    "loads_jet",
]

SYMMETRY_TOL = 1e-9
PD_THRESHOLD = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricJet2:
    """A point of the fiber P(m) x R^{dm} x R^{d d}, with d = m(m+1)/2.

    Build instances through :func:`validate_jet`, which enforces exact index
    symmetry and positive definiteness of ``g0``.
    """

    m: int
    g0: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray

    def __repr__(self):
        return f"MetricJet2(m={self.m}, g0={self.g0.tolist()})"

    def allclose(self, other, atol=1e-12):
        return (
            self.m == other.m
            and np.allclose(self.g0, other.g0, rtol=0, atol=atol)
            and np.allclose(self.dg, other.dg, rtol=0, atol=atol)
            and np.allclose(self.d2g, other.d2g, rtol=0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class FiberVector:
    m: int
    coords: np.ndarray


def _symmetrize_checked(arr, axes_pairs, name):
    """Average ``arr`` over the given transpositions after a tolerance check."""
    scale = max(float(np.max(np.abs(arr))) if arr.size else 0.0, 1.0)
    tol = SYMMETRY_TOL * scale
    out = arr
    for a, b in axes_pairs:
        perm = list(range(arr.ndim))
        perm[a], perm[b] = perm[b], perm[a]
        partner = np.transpose(out, perm)
        gap = float(np.max(np.abs(out - partner))) if out.size else 0.0
        if gap > tol:
            raise SymmetryViolation(
                f"{name} not symmetric in axes ({a},{b}): partner entries differ by {gap:.3g} > {tol:.3g}"
            )
        out = 0.5 * (out + partner)
    return out


def _check_pd(g0):
    # chol succeeds for PD; the eigenvalue threshold rejects near-singular input
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("g0 is not positive definite") from None
    lam = float(np.linalg.eigvalsh(g0)[0])
    if not lam > PD_THRESHOLD:
        raise NotPositiveDefinite(f"g0 smallest eigenvalue {lam:.3g} <= {PD_THRESHOLD:g}")


def validate_jet(raw=None, *, m=None, g0=None, dg=None, d2g=None) -> MetricJet2:
    """Build a :class:`MetricJet2` from a mapping or keyword arrays.

    ``raw`` may be a dict with keys ``m``, ``g`` (or ``g0``), ``dg``, ``d2g``.
    Missing derivative blocks default to zero.
    """
    if raw is not None:
        m = raw.get("m", m)
        g0 = raw.get("g", raw.get("g0", g0))
        dg = raw.get("dg", dg)
        d2g = raw.get("d2g", d2g)
    if g0 is None:
        raise ShapeMismatch("jet has no metric value block")
    try:
        g0 = np.asarray(g0, dtype=float)
        if m is None:
            m = g0.shape[0] if g0.ndim == 2 else -1
        m = int(m)
        dg = np.zeros((m,) * 3) if dg is None else np.asarray(dg, dtype=float)
        d2g = np.zeros((m,) * 4) if d2g is None else np.asarray(d2g, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch(f"jet arrays are not rectangular numeric arrays: {exc}") from None
    if m < 1:
        raise ShapeMismatch(f"dimension must be positive, got {m}")
    for name, arr, rank in (("g", g0, 2), ("dg", dg, 3), ("d2g", d2g, 4)):
        if arr.shape != (m,) * rank:
            raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {(m,) * rank}")
        if not np.all(np.isfinite(arr)):
            raise ShapeMismatch(f"{name} contains non-finite entries")
    g0 = _symmetrize_checked(g0, [(0, 1)], "g")
    dg = _symmetrize_checked(dg, [(1, 2)], "dg")
    d2g = _symmetrize_checked(d2g, [(2, 3), (0, 1)], "d2g")
    _check_pd(g0)
    return MetricJet2(m, _frozen(g0), _frozen(dg), _frozen(d2g))


def euclidean_jet(m: int) -> MetricJet2:
    return validate_jet(m=m, g0=np.eye(m))


def interpolate_jets(psi: MetricJet2, tau: MetricJet2, t: float) -> MetricJet2:
    """Affine combination ``t*tau + (1-t)*psi`` of all three blocks."""
    if psi.m != tau.m:
        raise DimensionMismatch(f"cannot interpolate jets of dimension {psi.m} and {tau.m}")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if t == 0.0:
        return psi
    if t == 1.0:
        return tau
    s = 1.0 - t
    return validate_jet(
        m=psi.m,
        g0=t * tau.g0 + s * psi.g0,
        dg=t * tau.dg + s * psi.dg,
        d2g=t * tau.d2g + s * psi.d2g,
    )


def taylor_eval(jet: MetricJet2, x, order: int = 0):
    """Evaluate the degree-2 Taylor metric of ``jet`` at ``x``.

    Returns the metric matrix for ``order=0``, ``(g, dg)`` for ``order=1`` and
    ``(g, dg, d2g)`` for ``order=2``, with derivatives indexed like the jet
    (derivative axes first). Positive definiteness at ``x`` is not checked.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (jet.m,) or not np.all(np.isfinite(x)):
        raise ShapeMismatch(f"point must be a finite vector of length {jet.m}")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    d2x = np.einsum("lkij,k->lij", jet.d2g, x)
    g = jet.g0 + np.einsum("kij,k->ij", jet.dg, x) + 0.5 * np.einsum("lij,l->ij", d2x, x)
    if order == 0:
        return g
    dgx = jet.dg + d2x
    if order == 1:
        return g, dgx
    return g, dgx, jet.d2g


# ---------------------------------------------------------------------------
# packed coordinates


def fiber_dim(m: int) -> int:
    d = m * (m + 1) // 2
    return d + d * m + d * d


@lru_cache(maxsize=None)
def _pairs(m):
    return tuple((i, j) for i in range(m) for j in range(i, m))


@lru_cache(maxsize=None)
def _pack_index(m):
    """Flat-array gather indices for the three blocks."""
    pairs = _pairs(m)
    pi = np.array([p[0] for p in pairs])
    pj = np.array([p[1] for p in pairs])
    g_idx = np.ravel_multi_index((pi, pj), (m, m))
    k = np.repeat(np.arange(m), len(pairs))
    dg_idx = np.ravel_multi_index((k, np.tile(pi, m), np.tile(pj, m)), (m,) * 3)
    n = len(pairs)
    kl = np.repeat(np.arange(n), n)
    ij = np.tile(np.arange(n), n)
    d2g_idx = np.ravel_multi_index((pi[kl], pj[kl], pi[ij], pj[ij]), (m,) * 4)
    return g_idx, dg_idx, d2g_idx


def pack_arrays(g0, dg, d2g) -> np.ndarray:
    """Packed coordinates of raw (symmetric) arrays; no validation."""
    m = g0.shape[0]
    gi, di, d2i = _pack_index(m)
    return np.concatenate([g0.ravel()[gi], dg.ravel()[di], d2g.ravel()[d2i]])


def unpack_arrays(m: int, coords):
    """Inverse of :func:`pack_arrays`; returns exactly symmetric arrays."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (fiber_dim(m),):
        raise LengthMismatch(f"expected {fiber_dim(m)} packed coordinates for m={m}, got {coords.shape}")
    d = m * (m + 1) // 2
    cg, cd, cdd = coords[:d], coords[d : d + d * m], coords[d + d * m :]
    pairs = _pairs(m)
    g0 = np.zeros((m, m))
    dg = np.zeros((m, m, m))
    d2g = np.zeros((m, m, m, m))
    for a, (i, j) in enumerate(pairs):
        g0[i, j] = g0[j, i] = cg[a]
        for k in range(m):
            dg[k, i, j] = dg[k, j, i] = cd[k * d + a]
    for b, (k, l) in enumerate(pairs):
        for a, (i, j) in enumerate(pairs):
            v = cdd[b * d + a]
            d2g[k, l, i, j] = d2g[k, l, j, i] = d2g[l, k, i, j] = d2g[l, k, j, i] = v
    return g0, dg, d2g


def flatten(jet: MetricJet2) -> FiberVector:
    return FiberVector(jet.m, _frozen(pack_arrays(jet.g0, jet.dg, jet.d2g)))


def unflatten(v) -> MetricJet2:
    g0, dg, d2g = unpack_arrays(v.m, v.coords)
    return validate_jet(m=v.m, g0=g0, dg=dg, d2g=d2g)


# ---------------------------------------------------------------------------
# JSON


def jet_to_dict(jet: MetricJet2) -> dict:
    return {"m": jet.m, "g": jet.g0.tolist(), "dg": jet.dg.tolist(), "d2g": jet.d2g.tolist()}


def jet_from_dict(doc) -> MetricJet2:
    if not isinstance(doc, dict):
        raise ShapeMismatch("jet document must be a JSON object")
    missing = [k for k in ("m", "g", "dg", "d2g") if k not in doc]
    if missing:
        raise ShapeMismatch(f"jet document missing keys: {', '.join(missing)}")
    if not isinstance(doc["m"], int) or isinstance(doc["m"], bool):
        raise ShapeMismatch("'m' must be an integer")
    return validate_jet(doc)


def dumps_jet(jet: MetricJet2, **kwargs) -> str:
    return json.dumps(jet_to_dict(jet), **kwargs)


def loads_jet(text: str) -> MetricJet2:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeMismatch(f"invalid JSON: {exc}") from None
    return jet_from_dict(doc)
