"""3-jets of origin-fixing local diffeomorphisms and their action on metric jets.

A jet ``F`` stands for the cubic map::

    F^k(y) = J1[k,i] y^i + 1/2 J2[k,i,j] y^i y^j + 1/6 J3[k,i,j,l] y^i y^j y^l

read as a coordinate change ``x = F(y)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import DimensionMismatch, GeneratorFailure, ShapeMismatch, SingularJet
from .jets import MetricJet2, validate_jet

__all__ = [
    "DiffeoJet3",
    "make_diffeo_jet",
    "identity_jet",
    "linear_jet",
    "compose",
    "invert",
    "pullback_arrays",
    "pullback_metric_jet",
    "push_forward_metric_jet",
    "random_diffeo_jet",
    "diffeo_eval",
    "diffeo_to_dict",
    "diffeo_from_dict",
]

DET_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiffeoJet3:
    m: int
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray

    def allclose(self, other, atol=1e-10):
        return (
            self.m == other.m
            and np.allclose(self.J1, other.J1, rtol=0, atol=atol)
            and np.allclose(self.J2, other.J2, rtol=0, atol=atol)
            and np.allclose(self.J3, other.J3, rtol=0, atol=atol)
        )


def _sym_lower(a, axes):
    """Average over all permutations of the listed trailing axes."""
    perms = list(permutations(axes))
    base = list(range(a.ndim))
    acc = np.zeros_like(a)
    for p in perms:
        order = base.copy()
        for src, dst in zip(axes, p):
            order[src] = dst
        acc += np.transpose(a, order)
    return acc / len(perms)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def make_diffeo_jet(J1, J2=None, J3=None) -> DiffeoJet3:
    """Validate and symmetrize a diffeomorphism 3-jet."""
    try:
        J1 = np.asarray(J1, dtype=float)
        m = J1.shape[0] if J1.ndim == 2 else -1
        J2 = np.zeros((m,) * 3) if J2 is None else np.asarray(J2, dtype=float)
        J3 = np.zeros((m,) * 4) if J3 is None else np.asarray(J3, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch(f"diffeo arrays are not numeric: {exc}") from None
    if m < 1:
        raise ShapeMismatch("J1 must be a square matrix")
    for name, arr, rank in (("J1", J1, 2), ("J2", J2, 3), ("J3", J3, 4)):
        if arr.shape != (m,) * rank:
            raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {(m,) * rank}")
        if not np.all(np.isfinite(arr)):
            raise ShapeMismatch(f"{name} contains non-finite entries")
    det = np.linalg.det(J1)
    if not abs(det) > DET_TOL:
        raise SingularJet(f"|det J1| = {abs(det):.3g} is below {DET_TOL:g}")
    return DiffeoJet3(m, _frozen(J1), _frozen(_sym_lower(J2, (1, 2))), _frozen(_sym_lower(J3, (1, 2, 3))))


def identity_jet(m: int) -> DiffeoJet3:
    return make_diffeo_jet(np.eye(m))


def linear_jet(A) -> DiffeoJet3:
    return make_diffeo_jet(A)


def _same_dim(*objs):
    ms = {o.m for o in objs}
    if len(ms) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(ms)}")


def compose(F: DiffeoJet3, G: DiffeoJet3) -> DiffeoJet3:
    """3-jet of ``F o G`` (apply ``G`` first)."""
    _same_dim(F, G)
    F1, F2, F3 = F.J1, F.J2, F.J3
    G1, G2, G3 = G.J1, G.J2, G.J3
    H1 = F1 @ G1
    H2 = np.einsum("kab,ai,bj->kij", F2, G1, G1) + np.einsum("ka,aij->kij", F1, G2)
    t = np.einsum("kab,aij,bl->kijl", F2, G2, G1)
    H3 = (
        np.einsum("kabc,ai,bj,cl->kijl", F3, G1, G1, G1, optimize=True)
        + t
        + np.einsum("kilj->kijl", t)
        + np.einsum("kjli->kijl", t)
        + np.einsum("ka,aijl->kijl", F1, G3)
    )
    return make_diffeo_jet(H1, H2, H3)


def invert(F: DiffeoJet3) -> DiffeoJet3:
    """3-jet of the inverse map, solved degree by degree from ``F o K = id``."""
    try:
        K1 = np.linalg.inv(F.J1)
    except np.linalg.LinAlgError:
        raise SingularJet("J1 is singular") from None
    if not abs(np.linalg.det(F.J1)) > DET_TOL:
        raise SingularJet("J1 is singular")
    K2 = -np.einsum("ka,abc,bi,cj->kij", K1, F.J2, K1, K1, optimize=True)
    t = np.einsum("kab,aij,bl->kijl", F.J2, K2, K1)
    rhs = (
        np.einsum("kabc,ai,bj,cl->kijl", F.J3, K1, K1, K1, optimize=True)
        + t
        + np.einsum("kilj->kijl", t)
        + np.einsum("kjli->kijl", t)
    )
    K3 = -np.einsum("ka,aijl->kijl", K1, rhs)
    return make_diffeo_jet(K1, K2, K3)


def pullback_arrays(F: DiffeoJet3, g0, dg, d2g):
    """Chain rule for ``(F* g)_ij(y) = dF^k/dy^i dF^l/dy^j g_kl(F(y))`` through second order.

    Linear in ``(g0, dg, d2g)``; works on arbitrary arrays (no validation).
    """
    A, dA, ddA = F.J1, F.J2, F.J3  # A[k,i]; dA[k,i,p]; ddA[k,i,p,q]
    # derivatives of G_kl(y) = g_kl(F(y)) at 0
    dG = np.einsum("akl,ap->pkl", dg, A)
    ddG = np.einsum("bakl,ap,bq->qpkl", d2g, A, A, optimize=True) + np.einsum("akl,apq->qpkl", dg, dA)

    h0 = A.T @ g0 @ A
    # first derivative, p = derivative index
    t1 = np.einsum("kip,lj,kl->pij", dA, A, g0)
    h1 = t1 + np.swapaxes(t1, 1, 2) + np.einsum("ki,lj,pkl->pij", A, A, dG)

    # second derivative, output index order [q, p, i, j]
    s1 = np.einsum("kipq,lj,kl->qpij", ddA, A, g0)
    s2 = np.einsum("kip,ljq,kl->qpij", dA, dA, g0)
    s3 = np.einsum("kip,lj,qkl->qpij", dA, A, dG)
    s4 = np.einsum("ki,lj,qpkl->qpij", A, A, ddG)
    s3 = s3 + np.swapaxes(s3, 0, 1)
    h2 = s1 + s2 + s3
    h2 = h2 + np.swapaxes(h2, 2, 3) + s4
    return h0, h1, h2


def pullback_metric_jet(F: DiffeoJet3, jet: MetricJet2) -> MetricJet2:
    """Metric jet in the ``y`` coordinates of ``x = F(y)``."""
    _same_dim(F, jet)
    h0, h1, h2 = pullback_arrays(F, jet.g0, jet.dg, jet.d2g)
    return validate_jet(m=jet.m, g0=h0, dg=h1, d2g=h2)


def push_forward_metric_jet(F: DiffeoJet3, jet: MetricJet2) -> MetricJet2:
    return pullback_metric_jet(invert(F), jet)


def diffeo_eval(F: DiffeoJet3, y):
    """Evaluate the cubic polynomial represented by ``F`` at ``y``."""
    y = np.asarray(y, dtype=float)
    return (
        F.J1 @ y
        + 0.5 * np.einsum("kij,i,j->k", F.J2, y, y)
        + np.einsum("kijl,i,j,l->k", F.J3, y, y, y) / 6.0
    )


def _random_symmetric(rng, shape_m, rank, amplitude):
    """Array of shape (m,)*(1+rank), symmetric in the trailing ``rank`` axes,
    each independent entry ``amplitude * U[-1, 1]``."""
    m = shape_m
    raw = amplitude * rng.uniform(-1.0, 1.0, size=(m,) * (1 + rank))
    out = np.empty_like(raw)
    for idx in np.ndindex(*raw.shape):
        head, tail = idx[0], tuple(sorted(idx[1:]))
        out[idx] = raw[(head,) + tail]
    return out


def random_diffeo_jet(m: int, seed, amplitude: float = 0.2, max_tries: int = 100) -> DiffeoJet3:
    """Deterministic random diffeomorphism jet near the identity."""
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        J1 = np.eye(m) + amplitude * rng.uniform(-1.0, 1.0, size=(m, m))
        if abs(np.linalg.det(J1)) > 0.5:
            break
    else:
        raise GeneratorFailure(f"no J1 with |det| > 0.5 after {max_tries} draws")
    J2 = _random_symmetric(rng, m, 2, amplitude)
    J3 = _random_symmetric(rng, m, 3, amplitude)
    return make_diffeo_jet(J1, J2, J3)


def diffeo_to_dict(F: DiffeoJet3) -> dict:
    return {"m": F.m, "J1": F.J1.tolist(), "J2": F.J2.tolist(), "J3": F.J3.tolist()}


def diffeo_from_dict(doc) -> DiffeoJet3:
    if not isinstance(doc, dict) or "J1" not in doc:
        raise ShapeMismatch("diffeo document must be an object with J1, J2, J3")
    F = make_diffeo_jet(doc["J1"], doc.get("J2"), doc.get("J3"))
    if "m" in doc and doc["m"] != F.m:
        raise ShapeMismatch(f"declared m={doc['m']} but J1 is {F.m}x{F.m}")
    return F


def dumps_diffeo(F: DiffeoJet3, **kwargs) -> str:
    return json.dumps(diffeo_to_dict(F), **kwargs)
