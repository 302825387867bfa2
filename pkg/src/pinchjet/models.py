"""Model jets: constant curvature, random samples of F_a, and perturbations."""

from __future__ import annotations

import numpy as np

from .diffeo import pullback_metric_jet, random_diffeo_jet
from .errors import DimensionTooSmall
from .jets import MetricJet2, validate_jet

__all__ = [
    "conformal_jet",
    "conformal_metric_field",
    "random_fa_sample",
    "perturbed_jet",
    "random_jet",
    "random_normalized_jet",
    "product_jet",
]


def conformal_jet(a: float, m: int) -> MetricJet2:
    """2-jet at 0 of ``(1 + a|x|^2/4)^-2 * delta``, the constant-curvature-``a`` model.

    Its jet is ``(I, 0, -a delta_kl delta_ij)``.
    """
    if m < 2:
        raise DimensionTooSmall(f"constant curvature needs m >= 2, got {m}")
    eye = np.eye(m)
    d2g = -float(a) * np.einsum("kl,ij->klij", eye, eye)
    return validate_jet(m=m, g0=eye, dg=np.zeros((m,) * 3), d2g=d2g)


def conformal_metric_field(a: float, m: int):
    """Exact conformal metric as a callable ``x -> (g(x), dg(x))``."""
    eye = np.eye(m)

    def field(x):
        x = np.asarray(x, dtype=float)
        u = 1.0 + 0.25 * a * (x @ x)
        f = u ** -2
        df = -a * x * u ** -3  # gradient of the conformal factor
        return f * eye, np.einsum("k,ij->kij", df, eye)

    return field


def random_fa_sample(a: float, m: int, seed, amplitude: float = 0.2) -> MetricJet2:
    """The conformal ``a``-jet expressed in random coordinates; lies in F_a."""
    base = conformal_jet(a, m)
    if amplitude == 0:
        return base
    return pullback_metric_jet(random_diffeo_jet(m, seed, amplitude), base)


def _symmetric_d2g(rng, m):
    raw = rng.uniform(-1.0, 1.0, size=(m,) * 4)
    out = np.empty_like(raw)
    for k, l, i, j in np.ndindex(*raw.shape):
        out[k, l, i, j] = raw[min(k, l), max(k, l), min(i, j), max(i, j)]
    return out


def _symmetric_dg(rng, m):
    raw = rng.uniform(-1.0, 1.0, size=(m,) * 3)
    return np.triu(raw) + np.swapaxes(np.triu(raw, 1), 1, 2)


def perturbed_jet(base: MetricJet2, epsilon: float, seed) -> MetricJet2:
    """``base`` with a random symmetric ``d2g`` perturbation of max-abs size ``epsilon``."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0:
        return base
    rng = np.random.default_rng(seed)
    p = _symmetric_d2g(rng, base.m)
    p *= epsilon / np.max(np.abs(p))
    return validate_jet(m=base.m, g0=base.g0, dg=base.dg, d2g=base.d2g + p)


def random_jet(m: int, seed, amplitude: float = 0.3, spread: float = 0.3) -> MetricJet2:
    """Generic random jet: ``g0 = I + spread * S`` (kept well inside P(m)), random dg, d2g."""
    rng = np.random.default_rng(seed)
    s = rng.uniform(-1.0, 1.0, size=(m, m))
    s = 0.5 * (s + s.T)
    g0 = np.eye(m) + spread * s / max(1.0, np.max(np.abs(np.linalg.eigvalsh(s))))
    dg = amplitude * _symmetric_dg(rng, m)
    d2g = amplitude * _symmetric_d2g(rng, m)
    return validate_jet(m=m, g0=g0, dg=dg, d2g=d2g)


def random_normalized_jet(m: int, seed, amplitude: float = 1.0) -> MetricJet2:
    """Jet with ``g0 = I``, ``dg = 0`` and random symmetric ``d2g``."""
    rng = np.random.default_rng(seed)
    return validate_jet(m=m, g0=np.eye(m), dg=np.zeros((m,) * 3), d2g=amplitude * _symmetric_d2g(rng, m))


def product_jet(*blocks: MetricJet2) -> MetricJet2:
    """Jet of the Riemannian product of the given jets (block-diagonal, no cross terms)."""
    sizes = [b.m for b in blocks]
    m = sum(sizes)
    g0 = np.zeros((m, m))
    dg = np.zeros((m,) * 3)
    d2g = np.zeros((m,) * 4)
    off = 0
    for b in blocks:
        s = slice(off, off + b.m)
        g0[s, s] = b.g0
        dg[s, s, s] = b.dg
        d2g[s, s, s, s] = b.d2g
        off += b.m
    return validate_jet(m=m, g0=g0, dg=dg, d2g=d2g)
