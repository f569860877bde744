"""Haar-random bath preparations: sampling, per-sample thermodynamics, octagon analysis."""
from __future__ import annotations

import csv
import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import thermo
from .correlations import DISCORD_METHOD, CorrelationRecord, correlation_record
from .dynamics import DegenerateSteadyState
from .model import (
    LABELS,
    NONCORRELATING_POPULATIONS,
    ModelParams,
    noncorrelating_unitary,
    permutation_unitary,
)
from .thermo import ThermoRecord, classify_mode, evaluate
from .tolerances import HULL_TOL


def fmt(x) -> str:
    """Floats with 17 significant digits; everything else via ``str``."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


# -- sampling -----------------------------------------------------------------


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for sample ``index``, derived from ``(seed, index)`` alone."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def haar_unitary(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def fingerprint(u: np.ndarray) -> tuple[float, ...]:
    row = np.asarray(u)[0]
    return tuple(float(v) for pair in zip(row.real, row.imag) for v in pair)


FINGERPRINT_COLUMNS = tuple(f"u0{j}_{part}" for j in range(4) for part in ("re", "im"))


@dataclass(frozen=True)
class EnsembleConfig:
    params: ModelParams = field(default_factory=lambda: ModelParams(B2=0.15))
    samples: int = 100_000
    seed: int = 0
    workers: int = 1
    compute_correlations: bool = False
    # debug hook: use this unitary for every sample instead of a Haar draw
    force_unitary: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class EnsembleRecord:
    index: int
    fingerprint: tuple[float, ...]
    thermo: ThermoRecord | None
    correlations: CorrelationRecord | None = None

    @property
    def degenerate(self) -> bool:
        return self.thermo is None


def evaluate_sample(cfg: EnsembleConfig, index: int) -> EnsembleRecord:
    if cfg.force_unitary is not None:
        u = np.asarray(cfg.force_unitary, dtype=complex)
    else:
        u = haar_unitary(sample_rng(cfg.seed, index))
    try:
        m, rec = evaluate(cfg.params, u)
    except DegenerateSteadyState:
        return EnsembleRecord(index, fingerprint(u), None)
    corr = None
    if cfg.compute_correlations:
        corr = correlation_record(m.rho_s, m.bath_prepared, m.joint_after)
    return EnsembleRecord(index, fingerprint(u), rec, corr)


def _evaluate_chunk(args) -> list[EnsembleRecord]:
    cfg, start, stop = args
    return [evaluate_sample(cfg, k) for k in range(start, stop)]


def run_ensemble(cfg: EnsembleConfig, chunk: int = 512) -> Iterator[EnsembleRecord]:
    """Yield one record per sample, in index order, whatever the worker count."""
    bounds = [(cfg, a, min(a + chunk, cfg.samples)) for a in range(0, cfg.samples, chunk)]
    if cfg.workers == 1:
        for b in bounds:
            yield from _evaluate_chunk(b)
        return
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        for batch in pool.map(_evaluate_chunk, bounds):
            yield from batch


def record_columns(with_correlations: bool) -> tuple[str, ...]:
    cols = ("sample",) + FINGERPRINT_COLUMNS + thermo.CSV_COLUMNS + ("degenerate",)
    if with_correlations:
        cols += CorrelationRecord.CSV_COLUMNS
    return cols


def record_row(rec: EnsembleRecord, with_correlations: bool) -> list[str]:
    row: list = [rec.index, *rec.fingerprint]
    if rec.thermo is None:
        row += ["haar", rec.index] + ["nan"] * (len(thermo.CSV_COLUMNS) - 2) + [1]
    else:
        row += thermo.csv_row(rec.thermo, "haar", rec.index) + [0]
    if with_correlations:
        row += list(rec.correlations.as_row()) if rec.correlations else ["nan"] * 5
    return [fmt(v) for v in row]


def write_records(records: Iterable[EnsembleRecord], path, with_correlations: bool) -> list[EnsembleRecord]:
    """Write ``records.csv`` and return the records as a list."""
    out = []
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(record_columns(with_correlations))
        for rec in records:
            w.writerow(record_row(rec, with_correlations))
            out.append(rec)
    return out


def _field(rec: EnsembleRecord, name: str) -> float:
    if hasattr(rec.thermo, name):
        return getattr(rec.thermo, name)
    if rec.correlations is not None and hasattr(rec.correlations, name):
        return getattr(rec.correlations, name)
    raise KeyError(f"unknown record field {name!r}")


def field_values(records: Sequence[EnsembleRecord], name: str) -> np.ndarray:
    return np.array([_field(r, name) for r in records if not r.degenerate], dtype=float)


@dataclass(frozen=True)
class SummaryStats:
    samples: int
    degenerate: int
    mean: dict
    std: dict
    mode_fractions: dict

    def as_dict(self) -> dict:
        return {
            "samples": self.samples,
            "degenerate": self.degenerate,
            "mean": self.mean,
            "std": self.std,
            "mode_fractions": self.mode_fractions,
        }


SUMMARY_FIELDS = ("w_partial", "q2_partial", "w_u", "w_complete", "q2_complete", "sigma_partial", "sigma_complete")


def summarize(records: Sequence[EnsembleRecord]) -> SummaryStats:
    good = [r for r in records if not r.degenerate]
    mean, std = {}, {}
    for name in SUMMARY_FIELDS:
        v = field_values(good, name)
        mean[name] = float(v.mean()) if v.size else float("nan")
        std[name] = float(v.std(ddof=1)) if v.size > 1 else float("nan")
    fractions = {}
    for scenario in ("partial", "complete"):
        c = Counter(classify_mode(r.thermo, scenario) for r in good)
        fractions[scenario] = {m: c.get(m, 0) / max(len(good), 1) for m in thermo.MODES}
    return SummaryStats(len(records), len(records) - len(good), mean, std, fractions)


# -- histograms ---------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    fields: tuple[str, ...]
    edges: tuple[np.ndarray, ...]
    counts: np.ndarray

    def merge(self, other: "Histogram") -> "Histogram":
        if self.fields != other.fields or not all(np.array_equal(a, b) for a, b in zip(self.edges, other.edges)):
            raise ValueError("histograms with different binning cannot be merged")
        return Histogram(self.fields, self.edges, self.counts + other.counts)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if len(self.fields) == 1:
                (e,) = self.edges
                w.writerow([f"{self.fields[0]}_lo", f"{self.fields[0]}_hi", "count"])
                for k, c in enumerate(self.counts):
                    w.writerow([fmt(e[k]), fmt(e[k + 1]), int(c)])
            else:
                ex, ey = self.edges
                fx, fy = self.fields
                w.writerow([f"{fx}_lo", f"{fx}_hi", f"{fy}_lo", f"{fy}_hi", "count"])
                for i, j in itertools.product(range(len(ex) - 1), range(len(ey) - 1)):
                    w.writerow([fmt(ex[i]), fmt(ex[i + 1]), fmt(ey[j]), fmt(ey[j + 1]), int(self.counts[i, j])])


def histogram(records: Sequence[EnsembleRecord], fields: Sequence[str], bins=50, ranges=None) -> Histogram:
    """1D or 2D histogram of record fields; edges from data min/max unless ``ranges`` is given."""
    fields = tuple(fields)
    if len(fields) not in (1, 2):
        raise ValueError("histogram takes one or two fields")
    data = [field_values(records, f) for f in fields]
    if data[0].size == 0:
        raise ValueError("no non-degenerate records to histogram")
    if len(fields) == 1:
        rng = None if ranges is None else ranges[0]
        if isinstance(bins, (int, np.integer)) and bins < 1:
            raise ValueError("bins must be >= 1")
        counts, e = np.histogram(data[0], bins=bins, range=rng)
        return Histogram(fields, (e,), counts)
    counts, ex, ey = np.histogram2d(data[0], data[1], bins=bins, range=ranges)
    return Histogram(fields, (ex, ey), counts.astype(np.int64))


# -- convex hull and octagon --------------------------------------------------


def convex_hull(points: np.ndarray, tol: float = HULL_TOL) -> list[int]:
    """Indices of hull vertices in counter-clockwise order.

    Exact monotone chain first; then vertices within ``tol`` of the line
    through their two neighbours (or of a neighbour) are removed.
    """
    pts = np.asarray(points, dtype=float)
    order = sorted(range(len(pts)), key=lambda k: (pts[k, 0], pts[k, 1]))
    if len(order) < 3:
        return order

    def cross(o, a, b):
        d, e = pts[a] - pts[o], pts[b] - pts[o]
        return d[0] * e[1] - d[1] * e[0]

    def chain(idx):
        out: list[int] = []
        for k in idx:
            while len(out) >= 2 and cross(out[-2], out[-1], k) <= 0:
                out.pop()
            out.append(k)
        return out

    hull = chain(order)[:-1] + chain(order[::-1])[:-1]
    changed = True
    while changed and len(hull) > 2:
        changed = False
        for j in range(len(hull)):
            prev, cur, nxt = hull[j - 1], hull[j], hull[(j + 1) % len(hull)]
            base = pts[nxt] - pts[prev]
            norm = math.hypot(*base)
            close = min(math.dist(pts[cur], pts[prev]), math.dist(pts[cur], pts[nxt])) <= tol
            if close or norm == 0 or cross(prev, nxt, cur) / norm >= -tol:
                del hull[j]
                changed = True
                break
    return hull


def signed_distances(hull_pts: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Distance of every point outside every CCW hull edge (positive = outside)."""
    a = np.asarray(hull_pts, dtype=float)
    b = np.roll(a, -1, axis=0)
    d = b - a
    normal = np.stack([d[:, 1], -d[:, 0]], axis=1) / np.linalg.norm(d, axis=1)[:, None]
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.einsum("pek,ek->pe", pts[:, None, :] - a[None, :, :], normal)


def _perm_name(perm) -> str:
    inv = {v: k for k, v in NONCORRELATING_POPULATIONS.items()}
    return inv.get(tuple(perm), "p" + "".join(str(k + 1) for k in perm))


@dataclass
class OctagonReport:
    params: ModelParams
    vertices: dict  # label -> (Q2_complete, W_complete)
    modes: dict  # label -> complete-scenario mode
    permutation_points: dict  # perm name -> (Q2_complete, W_complete)
    hull: list  # perm names of the 24-point hull, counter-clockwise
    octagon: list  # labels I..VIII in counter-clockwise order

    @property
    def otto_endpoints(self) -> tuple:
        return self.vertices["I"], self.vertices["II"]

    @property
    def labelled_vertices_are_hull(self) -> bool:
        return set(self.hull) == set(LABELS)

    def hull_points(self) -> np.ndarray:
        return np.array([self.permutation_points[k] for k in self.hull])

    def octagon_points(self) -> np.ndarray:
        return np.array([self.vertices[k] for k in self.octagon])

    def as_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "vertices": {k: list(v) for k, v in self.vertices.items()},
            "modes": self.modes,
            "octagon_order": self.octagon,
            "hull": self.hull,
            "labelled_vertices_are_hull": self.labelled_vertices_are_hull,
            "otto_endpoints": {"I": list(self.vertices["I"]), "II": list(self.vertices["II"])},
            "permutation_points": {k: list(v) for k, v in self.permutation_points.items()},
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json_dumps(self.as_dict()) + "\n", encoding="utf-8")


def json_dumps(obj) -> str:
    """JSON with non-finite floats mapped to ``null``; finite floats keep their exact repr."""

    def conv(o):
        if isinstance(o, dict):
            return {k: conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [conv(v) for v in o]
        if isinstance(o, (float, np.floating)):
            return float(o) if math.isfinite(o) else None
        if isinstance(o, np.integer):
            return int(o)
        return o

    return json.dumps(conv(obj), indent=2)


def octagon_analysis(p: ModelParams) -> OctagonReport:
    """Evaluate all 24 population permutations of the bath and their hull."""
    points, modes = {}, {}
    for perm in itertools.permutations(range(4)):
        _, rec = evaluate(p, permutation_unitary(perm))
        name = _perm_name(perm)
        points[name] = (rec.q2_complete, rec.w_complete)
        if name in LABELS:
            modes[name] = classify_mode(rec, "complete")
    names = list(points)
    pts = np.array([points[k] for k in names])
    hull = [names[k] for k in convex_hull(pts)]
    lab_pts = np.array([points[k] for k in LABELS])
    octagon = _ccw_order(LABELS, lab_pts)
    vertices = {k: points[k] for k in LABELS}
    return OctagonReport(p, vertices, modes, points, hull, octagon)


def _ccw_order(labels, pts):
    # angular order around the centroid; fine for the (convex) octagon
    c = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
    return [labels[k] for k in np.argsort(ang)]


@dataclass(frozen=True)
class Containment:
    violations: int
    indices: tuple[int, ...]
    max_distance: float


def containment_check(
    report: OctagonReport, points, ids: Sequence[int] | None = None, against: str = "hull", tol: float = HULL_TOL
) -> Containment:
    """Count points lying farther than ``tol`` outside the hull (or the labelled octagon)."""
    poly = report.hull_points() if against == "hull" else report.octagon_points()
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return Containment(0, (), float("-inf"))
    dist = signed_distances(poly, pts).max(axis=1)
    bad = np.flatnonzero(dist > tol)
    ids = list(range(len(pts))) if ids is None else list(ids)
    return Containment(len(bad), tuple(ids[k] for k in bad), float(dist.max()))


def ensemble_points(records: Sequence[EnsembleRecord]) -> tuple[np.ndarray, list[int]]:
    good = [r for r in records if not r.degenerate]
    pts = np.array([(r.thermo.q2_complete, r.thermo.w_complete) for r in good]).reshape(-1, 2)
    return pts, [r.index for r in good]


@dataclass(frozen=True)
class PartialExtremes:
    lower: float  # smallest W_partial over the eight operations
    upper: float
    lower_label: str
    upper_label: str
    sample_min: float
    sample_max: float
    outside: int  # samples beyond [lower, upper]


def partial_extremes(p: ModelParams, records: Sequence[EnsembleRecord], tol: float = HULL_TOL) -> PartialExtremes:
    """Bounds of ``W_partial`` from the eight non-correlating operations, against the samples."""
    w = {label: evaluate(p, noncorrelating_unitary(label))[1].w_partial for label in LABELS}
    lo = min(w, key=w.get)
    hi = max(w, key=w.get)
    vals = field_values(records, "w_partial")
    if vals.size == 0:
        raise ValueError("no non-degenerate records")
    outside = int(np.sum((vals < w[lo] - tol) | (vals > w[hi] + tol)))
    return PartialExtremes(w[lo], w[hi], lo, hi, float(vals.min()), float(vals.max()), outside)


def run_info() -> dict:
    return {"discord_method": DISCORD_METHOD}
