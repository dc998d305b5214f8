"""Empirical homotopy measures, tail masses, decay fits and per-sample checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy import stats

from .clusters import (
    ComponentSummary,
    HomotopyKey,
    check_window,
    component_table,
    key_betti,
)
from .errors import DomainError, FitError, GeometryError, UndefinedMeasureError
from .lattice import Box, CellGrid, CouplingField, WindowSpec, threshold, window_interior_box

COUNTING_RULES = ("N", "Nstar")

# d=2 site percolation threshold; used to label regimes, never to gate work.
P_C_2D = 0.5927


@dataclass(frozen=True)
class HomotopyMeasure:
    """Counts of clusters per homotopy key inside one window.

    ``counting="N"`` keeps only clusters avoiding the window's outer layer;
    ``counting="Nstar"`` keeps every cluster meeting the window, typed by its
    clipped part.  ``b0`` is the number of kept clusters.
    """

    d: int
    L: int
    counts: dict
    b0: int
    p: float | None = None
    mode: str = "open"
    counting: str = "N"

    @property
    def volume(self) -> int:
        return self.L**self.d

    @property
    def defined(self) -> bool:
        return self.b0 > 0

    @property
    def c_L(self) -> float:
        return self.b0 / self.volume

    def support(self) -> list[HomotopyKey]:
        return sorted(k for k, v in self.counts.items() if v)

    def count(self, key: HomotopyKey) -> int:
        return self.counts.get(key, 0)

    def a_exact(self, key: HomotopyKey) -> Fraction:
        if not self.defined:
            raise UndefinedMeasureError("measure has no clusters (b0 = 0)")
        return Fraction(self.count(key), self.b0)

    def a(self, key: HomotopyKey) -> float:
        return float(self.a_exact(key))

    def c(self, key: HomotopyKey) -> float:
        return self.count(key) / self.volume


def measure_from_counts(counts, b0, d, L, p=None, mode="open", counting="N") -> HomotopyMeasure:
    if counting not in COUNTING_RULES:
        raise DomainError(f"counting must be one of {COUNTING_RULES}, got {counting!r}")
    counts = {k: int(v) for k, v in counts.items() if v}
    if sum(counts.values()) != b0:
        raise DomainError("b0 must equal the total count")
    return HomotopyMeasure(d, L, counts, int(b0), p, mode, counting)


def empirical_measure(
    summaries: Iterable[ComponentSummary],
    window: WindowSpec,
    p: float | None = None,
    mode: str = "open",
    counting: str = "N",
    allow_undefined: bool = False,
) -> HomotopyMeasure:
    """The normalized counting measure of cluster types in ``window``.

    Raises:
        UndefinedMeasureError: if no cluster qualifies, unless
            ``allow_undefined`` is set.
    """
    counts: dict = {}
    for s in summaries:
        if counting == "N" and s.touches_window_boundary:
            continue
        counts[s.type_key] = counts.get(s.type_key, 0) + 1
    m = measure_from_counts(counts, sum(counts.values()), window.d, window.side, p, mode, counting)
    if not m.defined and not allow_undefined:
        raise UndefinedMeasureError(
            f"no clusters qualify under counting rule {counting} (b0 = 0)"
        )
    return m


def total_variation(m1: HomotopyMeasure, m2: HomotopyMeasure) -> float:
    """``sup_A |m1(A) - m2(A)|``, which for finite supports is half the l1 distance."""
    keys = set(m1.support()) | set(m2.support())
    return float(sum(abs(m1.a_exact(k) - m2.a_exact(k)) for k in keys) / 2)


def tail_mass(measure: HomotopyMeasure, k: int, n: int) -> float:
    """Mass of the types whose k-th Betti number is at least ``n``."""
    if not 1 <= k <= measure.d - 1:
        raise DomainError(f"k must lie in 1..{measure.d - 1}, got {k}")
    if not measure.defined:
        raise UndefinedMeasureError("measure has no clusters (b0 = 0)")
    if n <= 0:
        return 1.0
    hit = sum(v for key, v in measure.counts.items() if key_betti(key, k) >= n)
    return hit / measure.b0


@dataclass(frozen=True)
class TailCurve:
    """Tail masses ``(n, mu(T_n))``; ``counts`` holds the cluster counts behind
    each mass when they are known."""

    k: int
    d: int
    points: tuple[tuple[int, float], ...]
    meta: dict = field(default_factory=dict)
    counts: tuple[int, ...] | None = None

    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.points])


def tail_curve(measure: HomotopyMeasure, k: int, n_max: int, **meta) -> TailCurve:
    meta.setdefault("L", measure.L)
    meta.setdefault("p", measure.p)
    pts = tuple((n, tail_mass(measure, k, n)) for n in range(1, n_max + 1))
    counts = tuple(round(m * measure.b0) for _, m in pts)
    return TailCurve(k, measure.d, pts, meta, counts)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of ``log mu(T_n) = b - rate * x(n)``.

    ``x(n) = n`` for the exponential model and ``n^((d-1)/d)`` for the
    stretched model.  Weighted fits report the weighted R^2.
    """

    model: str
    rate: float
    r2: float
    fit_range: tuple[int, int]
    intercept: float
    rate_stderr: float
    n_points: int
    truncated: tuple[int, ...] = ()
    weighted: bool = False

    @property
    def relative_stderr(self) -> float:
        return self.rate_stderr / self.rate


def _weighted_line(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Weighted least squares for ``y = a + b x``: slope, intercept, R^2, slope SE."""
    sw = w.sum()
    xm, ym = (w * x).sum() / sw, (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - intercept - slope * x
    ss_res = (w * resid**2).sum()
    ss_tot = (w * (y - ym) ** 2).sum()
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    stderr = np.sqrt(ss_res / (len(x) - 2) / sxx) if len(x) > 2 else np.nan
    return slope, intercept, r2, stderr


def fit_tail_decay(
    curve: TailCurve, model: str = "exponential", fit_range=None, weighted: bool = False
) -> DecayFit:
    """Fit the decay of ``curve`` over ``fit_range`` (default: all of it).

    Points with zero mass are dropped and listed in ``truncated``.  With
    ``weighted`` each point is weighted by its cluster count, the inverse of
    the approximate Poisson variance of ``log mu(T_n)``; this needs
    ``curve.counts``.

    Raises:
        FitError: with fewer than 3 usable points or a non-decaying fit.
    """
    if model == "exponential":
        power = 1.0
    elif model == "stretched":
        power = (curve.d - 1) / curve.d
    else:
        raise DomainError(f"model must be 'exponential' or 'stretched', got {model!r}")
    if weighted and curve.counts is None:
        raise DomainError("a weighted fit needs the tail counts")
    lo, hi = fit_range if fit_range is not None else (1, max((n for n, _ in curve.points), default=0))
    ns, ys, ws, dropped = [], [], [], []
    for i, (n, mass) in enumerate(curve.points):
        if not lo <= n <= hi:
            continue
        if mass > 0:
            ns.append(n)
            ys.append(np.log(mass))
            ws.append(curve.counts[i] if weighted else 1.0)
        else:
            dropped.append(n)
    if len(ns) < 3:
        raise FitError(f"need >= 3 points with positive mass in [{lo}, {hi}], have {len(ns)}")
    x = np.asarray(ns, dtype=float) ** power
    y = np.asarray(ys)
    if weighted:
        slope, intercept, r2, stderr = _weighted_line(x, y, np.asarray(ws, dtype=float))
    else:
        res = stats.linregress(x, y)
        slope, intercept, r2, stderr = res.slope, res.intercept, res.rvalue**2, res.stderr
    rate = -float(slope)
    if not rate > 0:
        raise FitError(f"tail does not decay over [{lo}, {hi}] (fitted rate {rate:.4g})")
    return DecayFit(
        model=model,
        rate=rate,
        r2=float(r2),
        fit_range=(lo, hi),
        intercept=float(intercept),
        rate_stderr=float(stderr),
        n_points=len(ns),
        truncated=tuple(dropped),
        weighted=weighted,
    )


def _keyed(table, key, include_boundary):
    keys = table.keys()
    return [
        i
        for i in range(table.count)
        if (include_boundary or not table.touches[i]) and (key is None or keys[i] == key)
    ]


def sandwich_check(
    grid: CellGrid, window: WindowSpec, ell: int, key: HomotopyKey | None = None, mode: str = "open"
) -> "SandwichResult":
    """Evaluate both sides of the tiling sandwich for ``N(Phi, W_L; key) / L^d``.

    The lower side sums N over the ``floor(L/ell)^d`` disjoint ell-boxes
    tiling the window from its lower corner, each box relabelled on its own.
    The upper side sums N* over ``ceil(L/ell)^d`` boxes, where a cluster
    meeting a box is typed by its type in the window; only the window part of
    boxes that stick out is observed.
    """
    check_window(grid, window)
    L, d = window.side, window.d
    if not 0 < ell < L:
        raise GeometryError(f"need 0 < ell < L, got ell={ell}, L={L}")
    table = component_table(grid, mode)
    count = len(_keyed(table, key, False))
    x0 = window.corner

    lower = 0
    for idx in itertools.product(range(L // ell), repeat=d):
        tile = Box(tuple(c + i * ell for c, i in zip(x0, idx)), ell)
        sub = component_table(grid.restrict(tile), mode)
        lower += len(_keyed(sub, key, False))

    matching = np.zeros(table.count + 1, dtype=bool)
    matching[[i + 1 for i in _keyed(table, key, True)]] = True
    labels = table.labeling.labels
    upper = 0
    for idx in itertools.product(range(-(-L // ell)), repeat=d):
        sl = tuple(slice(i * ell, min((i + 1) * ell, L)) for i in idx)
        present = np.unique(labels[sl])
        upper += int(np.count_nonzero(matching[present[present > 0]]))

    shell_term = 2 * d * ell ** (d - 1) * ((-(-L // ell)) / L) ** d
    return SandwichResult(ell, L, d, lower, count, upper, shell_term)


@dataclass(frozen=True)
class SandwichResult:
    ell: int
    L: int
    d: int
    lower_count: int
    count: int
    upper_count: int
    shell_term: float

    @property
    def lower(self) -> float:
        return self.lower_count / self.L**self.d

    @property
    def value(self) -> float:
        return self.count / self.L**self.d

    @property
    def upper(self) -> float:
        return self.upper_count / self.L**self.d

    @property
    def holds(self) -> bool:
        return self.lower_count <= self.count <= self.upper_count


@dataclass(frozen=True)
class LipschitzResult:
    p1: float
    p2: float
    count1: int
    count2: int
    flipped: int
    d: int
    monotone: bool

    @property
    def bound(self) -> int:
        return 2 * self.d * self.flipped

    @property
    def holds(self) -> bool:
        return self.monotone and abs(self.count1 - self.count2) <= self.bound


def lipschitz_check(
    field: CouplingField,
    window: WindowSpec,
    p1: float,
    p2: float,
    key: HomotopyKey | None = None,
    mode: str = "open",
) -> LipschitzResult:
    """Compare ``N`` on the coupled pair ``threshold(field, p1)``, ``threshold(field, p2)``.

    Each newly black cell can change the count by at most ``2d``.
    """
    if p1 > p2:
        raise DomainError(f"need p1 <= p2, got {p1} > {p2}")
    box = window_interior_box(window)
    if field.origin != box.corner or any(n != box.side for n in field.dims):
        raise GeometryError("coupling field does not cover the window exactly")
    g1, g2 = threshold(field, p1), threshold(field, p2)
    monotone = not np.any(g1.occupancy & ~g2.occupancy)
    flipped = int(np.count_nonzero((field.values > p1) & (field.values <= p2)))
    n1 = len(_keyed(component_table(g1, mode), key, False))
    n2 = len(_keyed(component_table(g2, mode), key, False))
    return LipschitzResult(p1, p2, n1, n2, flipped, window.d, bool(monotone))
