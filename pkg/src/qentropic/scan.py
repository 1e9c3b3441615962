"""Deterministic parameter scans: coarse grids refined by golden-section search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .entropy import DomainError, QLike, as_qorder, q_ln
from .inefficiency import two_detector_report
from .quantum import KcbsConfig
from .scenarios import chsh_cq_array, kcbs_cq_array

TABLE1_Q = (1.0, 1.1, 1.2, 1.4, 1.6, 1.8, 2.0, 2.5, 3.0, 5.0, 8.0, 11.0)
FIG1_Q = (1.0, 1.15, 1.3, 1.7, 2.3)
FIG2_Q = (1.0, 1.13, 1.3, 1.6, 2.2)
FIG2_ALPHA = 0.1885

_EDGE = 1e-6
INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ScanGrid:
    """Parameter ranges, coarse-grid resolution and refinement tolerances."""

    gamma_range: tuple[float, float] = (_EDGE, math.pi - _EDGE)
    alpha_range: tuple[float, float] = (_EDGE, math.pi / 4 - _EDGE)
    theta_range: tuple[float, float] = (0.0, math.pi / 2)
    points: int = 400
    gamma_tol: float = 1e-6
    angle_tol: float = 1e-5
    max_sweeps: int = 400

    def __post_init__(self):
        g0, g1 = self.gamma_range
        a0, a1 = self.alpha_range
        t0, t1 = self.theta_range
        if not (0.0 < g0 <= g1 < math.pi):
            raise DomainError("gamma range must lie inside (0, pi)")
        if not (0.0 < a0 <= a1 < math.pi / 4):
            raise DomainError("alpha range must lie inside (0, pi/4)")
        if not (0.0 <= t0 <= t1 <= math.pi / 2):
            raise DomainError("theta range must lie inside [0, pi/2]")
        if self.points < 1:
            raise DomainError("need at least one grid point per axis")
        if not (self.gamma_tol > 0 and self.angle_tol > 0):
            raise DomainError("tolerances must be positive")

    @staticmethod
    def axis(lo: float, hi: float, points: int) -> np.ndarray:
        return np.array([lo]) if points == 1 or hi == lo else np.linspace(lo, hi, points)

    def gammas(self) -> np.ndarray:
        return self.axis(*self.gamma_range, self.points)

    def alphas(self) -> np.ndarray:
        return self.axis(*self.alpha_range, self.points)

    def thetas(self) -> np.ndarray:
        return self.axis(*self.theta_range, self.points)

    def with_step(self, step: float, param: str) -> "ScanGrid":
        """Grid whose ``param`` axis has roughly the given spacing."""
        lo, hi = getattr(self, f"{param}_range")
        if step <= 0:
            raise DomainError("step must be positive")
        return replace(self, points=max(1, int(math.floor((hi - lo) / step + 1e-9)) + 1))


@dataclass(frozen=True)
class MaxViolation:
    q: float
    max_cq: float
    max_cq_relative: float
    argmax: dict[str, float]


@dataclass(frozen=True)
class ChshScan:
    best: MaxViolation
    series: list[tuple[float, float]] = field(repr=False)


@dataclass(frozen=True)
class KcbsScan:
    best: MaxViolation
    alphas: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    surface: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class QThreshold:
    q_star: float | None
    bracket: tuple[float, float] | None

    @property
    def crossing(self) -> bool:
        return self.q_star is not None


def golden_section_max(f, lo: float, hi: float, tol: float):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = float(lo), float(hi)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    # the midpoint can lose to an interior probe by roundoff
    return max((fx, x), (fc, c), (fd, d))[::-1]


def _bracket(x: float, step: float, lo: float, hi: float) -> tuple[float, float]:
    return max(lo, x - step), min(hi, x + step)


def scan_chsh(q: QLike, grid: ScanGrid | None = None) -> ChshScan:
    """Maximise ``C_q(gamma)`` for the singlet and return the sampled curve."""
    grid = grid or ScanGrid()
    qq = as_qorder(q).q
    lnq2 = q_ln(2.0, qq)
    gammas = grid.gammas()
    values = chsh_cq_array(gammas, qq)
    i = int(np.argmax(values))
    best_x, best_f = float(gammas[i]), float(values[i])
    if gammas.size > 1:
        step = float(gammas[1] - gammas[0])
        lo, hi = _bracket(best_x, step, *grid.gamma_range)
        x, fx = golden_section_max(lambda g: float(chsh_cq_array(g, qq)), lo, hi, grid.gamma_tol)
        if fx >= best_f:
            best_x, best_f = x, fx
    series = [(float(g), float(v) / lnq2) for g, v in zip(gammas, values)]
    return ChshScan(MaxViolation(qq, best_f, best_f / lnq2, {"gamma": best_x}), series)


def _refine_kcbs(q: float, alpha: float, theta: float, steps, grid: ScanGrid):
    f_at = lambda a, t: float(kcbs_cq_array(a, t, q))
    best = f_at(alpha, theta)
    for _ in range(grid.max_sweeps):
        lo, hi = _bracket(alpha, steps[0], *grid.alpha_range)
        a_new, fa = golden_section_max(lambda a: f_at(a, theta), lo, hi, grid.angle_tol / 10)
        lo, hi = _bracket(theta, steps[1], *grid.theta_range)
        t_new, ft = golden_section_max(lambda t: f_at(a_new, t), lo, hi, grid.angle_tol / 10)
        moved = max(abs(a_new - alpha), abs(t_new - theta))
        if ft < best:
            break
        alpha, theta, best = a_new, t_new, ft
        if moved < grid.angle_tol:
            break
    return alpha, theta, best


def scan_kcbs(q: QLike, grid: ScanGrid | None = None) -> KcbsScan:
    """Maximise the KCBS ``C_q`` over ``(alpha, theta)``.

    A coarse grid is evaluated in one vectorised pass; the best sample is then
    polished by alternating golden-section searches in ``alpha`` and ``theta``.
    Ties on the grid go to the smallest ``(alpha, theta)``.
    """
    grid = grid or ScanGrid()
    qq = as_qorder(q).q
    alphas, thetas = grid.alphas(), grid.thetas()
    surface = kcbs_cq_array(alphas[:, None], thetas[None, :], qq)
    i, k = np.unravel_index(int(np.argmax(surface)), surface.shape)
    alpha, theta, best = float(alphas[i]), float(thetas[k]), float(surface[i, k])
    steps = (
        float(alphas[1] - alphas[0]) if alphas.size > 1 else 0.0,
        float(thetas[1] - thetas[0]) if thetas.size > 1 else 0.0,
    )
    if steps[0] > 0 and steps[1] > 0:
        a, t, f = _refine_kcbs(qq, alpha, theta, steps, grid)
        if f >= best:
            alpha, theta, best = a, t, f
    lnq2 = q_ln(2.0, qq)
    return KcbsScan(
        MaxViolation(qq, best, best / lnq2, {"alpha": alpha, "theta": theta}),
        alphas,
        thetas,
        surface,
    )


def kcbs_theta_series(alpha: float, q: QLike, theta_grid) -> list[tuple[float, float]]:
    """``(theta, C_q / ln_q 2)`` along a line of fixed ``alpha``."""
    qq = as_qorder(q).q
    KcbsConfig(alpha)
    thetas = np.asarray(theta_grid, dtype=float).reshape(-1)
    if thetas.size == 0:
        return []
    values = kcbs_cq_array(alpha, thetas, qq) / q_ln(2.0, qq)
    return [(float(t), float(v)) for t, v in zip(thetas, values)]


def q_threshold(
    alpha: float, theta: float, q_range: tuple[float, float], samples: int = 201, tol: float = 1e-4
) -> QThreshold:
    """Locate where ``C_q`` changes sign as ``q`` varies at a fixed configuration.

    A uniform scan brackets the first sign change, which is then bisected to
    ``tol``. Ranges without a sign change give ``q_star=None``.
    """
    KcbsConfig(alpha, theta)
    lo, hi = (float(v) for v in q_range)
    if not (0.0 < lo < hi):
        raise DomainError("q range must satisfy 0 < lo < hi")
    f = lambda q: float(kcbs_cq_array(alpha, theta, q))
    qs = np.linspace(lo, hi, samples)
    vals = np.array([f(q) for q in qs])
    signs = np.sign(vals)
    change = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if change.size == 0:
        return QThreshold(None, None)
    a, b = float(qs[change[0]]), float(qs[change[0] + 1])
    fa = vals[change[0]]
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            a = b = m
            break
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return QThreshold(0.5 * (a + b), (a, b))


def table1_rows(q_list=TABLE1_Q, grid: ScanGrid | None = None) -> list[MaxViolation]:
    return [scan_kcbs(q, grid).best for q in q_list]


def table2_ratios(q_list=TABLE1_Q, eta: float = 0.99, grid: ScanGrid | None = None, maxima=None) -> list[float]:
    """``r_q(eta)`` at each order's own maximal-violation configuration.

    ``maxima`` may pass precomputed :class:`MaxViolation` rows in ``q_list`` order.
    """
    rows = maxima if maxima is not None else table1_rows(q_list, grid)
    out = []
    for q, row in zip(q_list, rows):
        cfg = KcbsConfig(row.argmax["alpha"], row.argmax["theta"])
        out.append(two_detector_report(cfg, eta, q).ratio)
    return out


def positive_width(series: list[tuple[float, float]]) -> float:
    """Total length of the parameter set where the series is positive (trapezoid-free count)."""
    if len(series) < 2:
        return 0.0
    xs = np.array([s[0] for s in series])
    ys = np.array([s[1] for s in series])
    step = float(np.mean(np.diff(xs)))
    return float(np.count_nonzero(ys > 0) * step)
