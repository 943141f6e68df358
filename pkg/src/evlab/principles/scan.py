"""mu-scans, geometric window probes and mesh-refinement studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MuInSpectrum
from ..gallery import build
from ..lattice import MarginReport, margins
from ..numerics import local_dips
from .spectral import DEFAULT_THRESHOLDS, Thresholds, build_spectral_data, operator_resolvent, resolvent_and_sigma

STRONG_POSITIVE = "strong_positive"
STRONG_NEGATIVE = "strong_negative"
MIXED = "mixed"
SKIPPED = "skipped_near_spectrum"


def classify(report: MarginReport, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> str:
    """Sign class of a matrix against ``u (x) phi``; margins inside ``+-eps_cls * c_hat`` are never strong."""
    eps = thresholds.eps_cls * report.two_sided_constant
    if report.lower_margin > eps:
        return STRONG_POSITIVE
    if report.upper_margin < -eps:
        return STRONG_NEGATIVE
    return MIXED


@dataclass(frozen=True)
class MuRecord:
    mu: float
    classification: str
    margins: MarginReport | None = None
    sigma_min: float = 0.0

    def as_dict(self):
        m = self.margins
        return {
            "mu": self.mu,
            "lower_margin": None if m is None else m.lower_margin,
            "upper_margin": None if m is None else m.upper_margin,
            "c_hat": None if m is None else m.two_sided_constant,
            "classification": self.classification,
        }


@dataclass(frozen=True)
class ScanReport:
    operator: str
    lambda0: float
    gap: float
    records: tuple
    right_window: tuple | None  # (nearest, farthest) strong_positive mu right of lambda0
    left_window: tuple | None  # (nearest, farthest) strong_negative mu left of lambda0
    power: int = 1

    @property
    def mu_values(self):
        return np.array([r.mu for r in self.records])

    @property
    def classifications(self):
        return [r.classification for r in self.records]

    def count(self, cls: str) -> int:
        return sum(1 for r in self.records if r.classification == cls)

    @property
    def right_width(self) -> float:
        return 0.0 if self.right_window is None else self.right_window[1] - self.lambda0

    @property
    def left_width(self) -> float:
        return 0.0 if self.left_window is None else self.lambda0 - self.left_window[1]


def _run_from(records, predicate):
    """Nearest and farthest mu of the leading run satisfying ``predicate`` (skipped points are transparent)."""
    first = last = None
    for r in records:
        if r.classification == SKIPPED:
            continue
        if not predicate(r):
            break
        if first is None:
            first = r.mu
        last = r.mu
    return None if first is None else (first, last)


def windows(records, lambda0):
    right = sorted((r for r in records if r.mu > lambda0), key=lambda r: r.mu)
    left = sorted((r for r in records if r.mu < lambda0), key=lambda r: -r.mu)
    return (_run_from(right, lambda r: r.classification == STRONG_POSITIVE),
            _run_from(left, lambda r: r.classification == STRONG_NEGATIVE))


def _evaluate(op, mu, power):
    """Resolvent power and sigma_min at ``mu``; ``None`` when the shift is numerically singular."""
    R, sig = resolvent_and_sigma(op, mu)
    if R is not None and power > 1:
        R = np.linalg.matrix_power(R, power)
    return R, sig


def scan(op, mu_min: float, mu_max: float, steps: int, thresholds: Thresholds | None = None,
         spectral=None, power: int = 1) -> ScanReport:
    """Classify ``R(mu)^power`` against ``op.frame`` on a uniform mu-grid.

    A point is skipped when its shift is numerically singular or when it lies
    within ``gap * proximity_fraction`` of a sigma_min dip other than the one
    at ``lambda0`` itself.
    """
    th = thresholds or DEFAULT_THRESHOLDS
    if int(steps) != steps or steps < 2:
        raise ValueError(f"steps must be an integer >= 2, got {steps!r}")
    if not (np.isfinite(mu_min) and np.isfinite(mu_max)) or mu_min >= mu_max:
        raise ValueError(f"invalid mu range [{mu_min}, {mu_max}]")
    sd = spectral or build_spectral_data(op)
    lam, gap = sd.lambda0, sd.gap
    grid = np.linspace(mu_min, mu_max, int(steps))
    mats, sig = [], []
    for mu in grid:
        R, s = _evaluate(op, float(mu), power)
        mats.append(R)
        sig.append(s)
    dips = [d for d in local_dips(op.matrix, grid, np.array(sig)) if abs(d - lam) > gap / 4]
    radius = gap * th.proximity_fraction
    records = []
    for mu, R, s in zip(grid, mats, sig):
        mu = float(mu)
        if R is None or any(abs(mu - d) < radius for d in dips):
            records.append(MuRecord(mu, SKIPPED, None, s))
            continue
        rep = margins(R, op.frame)
        records.append(MuRecord(mu, classify(rep, th), rep, s))
    right, left = windows(records, lam)
    return ScanReport(op.name, lam, gap, tuple(records), right, left, power)


def geometric_offsets(reach: float, count: int = 41, per_octave: int = 4):
    """Offsets ``reach * 2^(-k/per_octave)``, k = count-1, ..., 0 (nearest first)."""
    k = np.arange(count - 1, -1, -1)
    return reach * 2.0 ** (-k / per_octave)


def probe_window(op, side: int, predicate, reach: float, lambda0: float | None = None,
                 count: int = 41, power: int = 1):
    """Width of the leading run of ``predicate(R(mu)^power)`` on geometric offsets from ``lambda0``.

    ``side`` is +1 (right) or -1 (left).  Returns ``(width, records)`` where
    each record is ``(mu, passed)``; singular points are transparent and
    probing stops at the first failure.
    """
    lam = op.lambda0 if lambda0 is None else lambda0
    width, out = 0.0, []
    for off in geometric_offsets(reach, count):
        mu = lam + side * off
        R, _ = _evaluate(op, mu, power)
        if R is None:
            out.append((mu, None))
            continue
        ok = bool(predicate(R))
        out.append((mu, ok))
        if not ok:
            break
        width = off
    return width, out


# ---------------------------------------------------------------------------
# refinement


@dataclass(frozen=True)
class MeshRecord:
    n: int
    size: int
    lower_margin: float
    upper_margin: float
    c_hat: float

    def as_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class RefinementStudy:
    operator: str
    params: dict
    probe_mu: float
    meshes: tuple
    tracked: str  # lower_margin | upper_margin | c_hat
    verdict: str  # uniform | divergent | inconclusive
    ratios: tuple = field(default=())  # tracked value relative to the coarsest mesh
    growth: tuple = field(default=())  # c_hat ratios between consecutive meshes

    @property
    def n_list(self):
        return tuple(m.n for m in self.meshes)


UNIFORM, DIVERGENT, INCONCLUSIVE = "uniform", "divergent", "inconclusive"


def refinement_verdict(meshes, tracked: str, thresholds: Thresholds = DEFAULT_THRESHOLDS):
    values = np.array([getattr(m, tracked) for m in meshes])
    chat = np.array([m.c_hat for m in meshes])
    growth = tuple(float(b / a) if a > 0 else float("inf") for a, b in zip(chat[:-1], chat[1:]))
    ratios = tuple(float(v / values[0]) if values[0] != 0 else float("nan") for v in values)
    if len(meshes) - 1 < thresholds.min_doublings:
        return INCONCLUSIVE, ratios, growth
    if all(g >= thresholds.divergent_growth for g in growth):
        return DIVERGENT, ratios, growth
    same_sign = values[0] != 0 and np.all(np.sign(values) == np.sign(values[0]))
    if same_sign and all(thresholds.uniform_low <= r <= thresholds.uniform_high for r in ratios):
        return UNIFORM, ratios, growth
    return INCONCLUSIVE, ratios, growth


def _auto_track(first: MeshRecord) -> str:
    if first.lower_margin > 0:
        return "lower_margin"
    if first.upper_margin < 0:
        return "upper_margin"
    return "c_hat"


def mesh_record(op, mu: float, n: int | None = None) -> MeshRecord:
    rep = margins(operator_resolvent(op, mu), op.frame)
    return MeshRecord(op.grid.n if n is None else int(n), op.n, rep.lower_margin, rep.upper_margin, rep.two_sided_constant)


def refinement_study(name: str, params: dict | None, probe_mu: float, n_list, track: str = "auto",
                     thresholds: Thresholds | None = None) -> RefinementStudy:
    """Margins of ``R(probe_mu)`` on successively finer meshes and the resulting verdict.

    The verdict is ``divergent`` when ``c_hat`` grows by at least
    ``divergent_growth`` at every refinement, ``uniform`` when the tracked
    quantity keeps its sign and stays within ``[uniform_low, uniform_high]``
    of its coarsest value, and ``inconclusive`` otherwise.
    """
    th = thresholds or DEFAULT_THRESHOLDS
    n_list = sorted(int(n) for n in n_list)
    if len(set(n_list)) != len(n_list) or not n_list:
        raise ValueError("n_list must contain distinct mesh sizes")
    params = dict(params or {})
    meshes = []
    for n in n_list:
        op = build(name, n, **params)
        try:
            meshes.append(mesh_record(op, probe_mu, n))
        except MuInSpectrum as exc:
            raise MuInSpectrum(probe_mu, f"probe mu={probe_mu} is in the spectrum at n={n}") from exc
    if track == "auto":
        track = _auto_track(meshes[0])
    if track not in ("lower_margin", "upper_margin", "c_hat"):
        raise ValueError(f"unknown tracked quantity {track!r}")
    verdict, ratios, growth = refinement_verdict(meshes, track, th)
    return RefinementStudy(name, params, float(probe_mu), tuple(meshes), track, verdict, ratios, growth)
