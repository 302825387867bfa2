"""Deformation retraction of the jet fiber onto a constant-curvature jet.

For a start jet ``psi`` and target ``tau`` each grid point ``t`` is computed
independently:

1. ``jet_t = t*tau + (1-t)*psi``
2. ``F_t`` = exponential coordinate change normalizing ``jet_t``
3. ``psi_n = F_0* psi`` and ``tau_n = F_1* tau`` (both in normal form)
4. ``h_t = t*tau_n + (1-t)*psi_n``
5. ``G_t = (F_t^-1)* h_t``
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .curvature import SearchConfig, SecExtremes, sec_extremes
from .diffeo import invert, pullback_metric_jet
from .errors import DimensionMismatch, GridInvalid
from .jets import MetricJet2, flatten, interpolate_jets, jet_to_dict, validate_jet
from .normal_coords import coordinate_change, normalize

__all__ = [
    "RetractionTrace",
    "FaReport",
    "retract",
    "retract_point",
    "retract_check_fa",
    "trace_to_json",
    "trace_to_csv",
]


@dataclass(frozen=True, eq=False)
class RetractionTrace:
    ts: np.ndarray
    jets: tuple
    sec_ranges: tuple
    endpoint_residuals: tuple


@dataclass(frozen=True)
class FaReport:
    a: float
    tol: float
    max_deviation: float
    worst_t: float
    passed: bool


def _check_grid(ts):
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or len(ts) < 2:
        raise GridInvalid("grid needs at least two points")
    if ts[0] != 0.0 or ts[-1] != 1.0:
        raise GridInvalid("grid must start at 0 and end at 1")
    if not np.all(np.diff(ts) > 0):
        raise GridInvalid("grid must be strictly increasing")
    return ts


def _packed_maxabs(a: MetricJet2, b: MetricJet2) -> float:
    return float(np.max(np.abs(flatten(a).coords - flatten(b).coords)))


class _Retraction:
    """Pieces of G shared by all grid points."""

    def __init__(self, psi, tau, B_ref=None):
        if psi.m != tau.m:
            raise DimensionMismatch(f"start has m={psi.m}, target has m={tau.m}")
        self.psi, self.tau, self.B_ref = psi, tau, B_ref
        self.psi_n = normalize(psi, B_ref)[0]
        self.tau_n = normalize(tau, B_ref)[0]

    def at(self, t: float) -> MetricJet2:
        t = float(t)
        F_t = coordinate_change(interpolate_jets(self.psi, self.tau, t), self.B_ref)
        h_t = validate_jet(
            m=self.psi.m,
            g0=t * self.tau_n.g0 + (1 - t) * self.psi_n.g0,
            dg=t * self.tau_n.dg + (1 - t) * self.psi_n.dg,
            d2g=t * self.tau_n.d2g + (1 - t) * self.psi_n.d2g,
        )
        return pullback_metric_jet(invert(F_t), h_t)


def retract_point(psi: MetricJet2, tau: MetricJet2, t: float, B_ref=None) -> MetricJet2:
    """G(t, psi) for a single parameter value."""
    return _Retraction(psi, tau, B_ref).at(t)


def retract(psi: MetricJet2, tau: MetricJet2, ts=None, B_ref=None, cfg: SearchConfig = SearchConfig()) -> RetractionTrace:
    """Sample the retraction path ``t -> G(t, psi)`` with curvature extremes at each point."""
    ts = _check_grid(np.linspace(0.0, 1.0, 101) if ts is None else ts)
    r = _Retraction(psi, tau, B_ref)
    jets = tuple(r.at(t) for t in ts)
    ranges = tuple(sec_extremes(j, cfg) for j in jets)
    residuals = (_packed_maxabs(jets[0], psi), _packed_maxabs(jets[-1], tau))
    return RetractionTrace(ts, jets, ranges, residuals)


def retract_check_fa(trace: RetractionTrace, a: float, tol: float = 1e-6) -> FaReport:
    """Largest deviation of the sampled sectional curvatures from ``a`` along the trace."""
    devs = [max(abs(s.min_sec - a), abs(s.max_sec - a)) for s in trace.sec_ranges]
    k = int(np.argmax(devs))
    worst = float(devs[k])
    return FaReport(float(a), float(tol), worst, float(trace.ts[k]), worst <= tol)


def _extremes_dict(s: SecExtremes) -> dict:
    return {
        "sec_min": s.min_sec,
        "sec_max": s.max_sec,
        "certified": s.certified,
        "bracket": [s.bracket_low, s.bracket_high],
    }


def trace_to_json(trace: RetractionTrace, extra=None) -> str:
    doc = {
        "ts": trace.ts.tolist(),
        "jets": [jet_to_dict(j) for j in trace.jets],
        "sec_ranges": [_extremes_dict(s) for s in trace.sec_ranges],
        "endpoint_residuals": list(trace.endpoint_residuals),
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc)


def trace_to_csv(trace: RetractionTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "sec_min", "sec_max"])
    for t, s in zip(trace.ts, trace.sec_ranges):
        w.writerow([f"{t:.17g}", f"{s.min_sec:.17g}", f"{s.max_sec:.17g}"])
    return buf.getvalue()
