"""Detector inefficiency in the KCBS scenario.

A no-click is recorded as an extra outcome, stored as the last index of an
extended table. Two models are covered:

* ``single``: one detector per compatible pair, so either both observables
  click (probability ``eta``) or neither does.
* ``two``: each observable has its own detector of efficiency ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .entropy import (
    DomainError,
    JointDist,
    ProbDist,
    QLike,
    as_eta,
    as_qorder,
    binary_q_entropy,
    joint_entropy,
    tsallis_entropy,
)
from .quantum import KcbsConfig
from .scenarios import KCBS_PAIRS, kcbs_cq, kcbs_pair_tables

MARGINAL_TOL = 1e-10
DEFAULT_ETA_GRID = (0.99, 0.995, 0.999)


class ModelKind(str, Enum):
    SINGLE = "single"
    TWO = "two"


class RatioUndefinedError(ArithmeticError):
    """The ratio needs a violating configuration (``C_q > 0``).

    The partially filled :class:`EtaReport` is kept on ``report``.
    """

    def __init__(self, message: str, report: "EtaReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class InefficiencyModel:
    kind: ModelKind
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "eta", as_eta(self.eta))


@dataclass(frozen=True)
class EtaReport:
    c_q: float
    c_q_eta: float
    delta_q: float
    ratio: float | None
    q: float
    eta: float
    model: ModelKind = ModelKind.TWO


@dataclass(frozen=True)
class LinearFit:
    """Least-squares fit ``r_q(eta) ~ slope * (1 - eta)`` through the origin."""

    slope: float | None
    max_rel_deviation: float | None
    etas: tuple[float, ...]
    ratios: tuple[float, ...]

    @property
    def defined(self) -> bool:
        return self.slope is not None


def deform_marginal(p, eta) -> ProbDist:
    """``{eta p(x)} U {1 - eta}``."""
    e = as_eta(eta)
    probs = p.probs if isinstance(p, ProbDist) else ProbDist(p).probs
    return ProbDist(np.append(e * probs, 1.0 - e))


def deform_joint(j, model: InefficiencyModel, marg_a=None, marg_b=None) -> JointDist:
    """Extend a pair table with no-click outcomes.

    Args:
        j: table ``p(x, y)``.
        model: inefficiency model and efficiency.
        marg_a, marg_b: single-observable distributions used on the border of the
            two-detector table. Default to the marginals of ``j``; when given
            they must agree with them.

    Returns:
        Table of shape ``(nA + 1, nB + 1)`` whose last row and column are the
        no-click outcome.
    """
    table = j.table if isinstance(j, JointDist) else JointDist(j).table
    pa = table.sum(axis=1) if marg_a is None else _consistent(marg_a, table.sum(axis=1), "row")
    pb = table.sum(axis=0) if marg_b is None else _consistent(marg_b, table.sum(axis=0), "column")
    e = model.eta
    na, nb = table.shape
    out = np.zeros((na + 1, nb + 1))
    if model.kind is ModelKind.SINGLE:
        out[:na, :nb] = e * table
        out[na, nb] = 1.0 - e
    else:
        out[:na, :nb] = e * e * table
        out[:na, nb] = e * (1.0 - e) * pa
        out[na, :nb] = e * (1.0 - e) * pb
        out[na, nb] = (1.0 - e) ** 2
    return JointDist(out)


def _consistent(marg, actual: np.ndarray, which: str) -> np.ndarray:
    probs = marg.probs if isinstance(marg, ProbDist) else ProbDist(marg).probs
    if probs.shape != actual.shape or np.max(np.abs(probs - actual)) > MARGINAL_TOL:
        raise DomainError(f"{which} marginal is inconsistent with the joint table")
    return probs


def _kcbs_parts(cfg: KcbsConfig):
    tables = kcbs_pair_tables(cfg)
    singles = [tables[p].marginal_b() for p in KCBS_PAIRS[:3]]  # X2, X3, X4
    return tables, singles


def deformed_joint_form(cfg: KcbsConfig, model: InefficiencyModel, q: QLike) -> float:
    """The joint-entropy expression built from deformed statistics.

    Returns ``-sum_{j<5} H(X_j, X_{j+1}) + H(X_1, X_5) + H(X_2) + H(X_3) + H(X_4)``
    with every entropy computed on an explicitly constructed no-click table.
    At ``eta = 1`` this is ``C_q``.
    """
    qq = as_qorder(q).q
    tables, singles = _kcbs_parts(cfg)
    deformed = {p: deform_joint(tables[p], model) for p in KCBS_PAIRS}
    pairs = math.fsum(joint_entropy(deformed[p], qq) for p in KCBS_PAIRS[:4])
    ones = math.fsum(tsallis_entropy(deform_marginal(s, model.eta), qq) for s in singles)
    return -pairs + joint_entropy(deformed[(0, 4)], qq) + ones


def single_detector_cq(c_q: float, eta, q: QLike) -> float:
    """With one detector per pair the binary-entropy offsets cancel: ``eta**q * C_q``."""
    return as_eta(eta) ** as_qorder(q).q * c_q


def two_detector_delta(single_entropies, eta, q: QLike) -> float:
    """Penalty ``Delta_q(eta)`` from the entropies of ``X_2, X_3, X_4``."""
    e = as_eta(eta)
    qq = as_qorder(q).q
    eq, fq = e**qq, (1.0 - e) ** qq
    return eq * (eq + 2.0 * fq - 1.0) * math.fsum(single_entropies) + 3.0 * (
        eq + fq
    ) * binary_q_entropy(e, qq)


def two_detector_report(cfg: KcbsConfig, eta, q: QLike) -> EtaReport:
    """``C_q^(eta eta) = eta**(2q) C_q - Delta_q(eta)`` and ``r_q(eta) = |Delta| / (eta**(2q) C_q)``.

    Raises:
        RatioUndefinedError: if ``C_q <= 0`` or ``eta == 0``; the error carries
            the report with ``ratio=None``.
    """
    e = as_eta(eta)
    qq = as_qorder(q).q
    c_q = kcbs_cq(cfg, qq).c_q
    _, singles = _kcbs_parts(cfg)
    delta = two_detector_delta([tsallis_entropy(s, qq) for s in singles], e, qq)
    scaled = e ** (2.0 * qq) * c_q
    report = EtaReport(c_q, scaled - delta, delta, None, qq, e, ModelKind.TWO)
    if c_q <= 0.0 or scaled == 0.0:
        raise RatioUndefinedError(
            f"r_q(eta) needs C_q > 0 and eta > 0 (C_q = {c_q:.6g}, eta = {e})", report
        )
    return EtaReport(c_q, scaled - delta, delta, abs(delta) / scaled, qq, e, ModelKind.TWO)


def single_detector_report(cfg: KcbsConfig, eta, q: QLike) -> EtaReport:
    """Single-detector analogue; there is no penalty term, so the ratio is 0."""
    e = as_eta(eta)
    qq = as_qorder(q).q
    c_q = kcbs_cq(cfg, qq).c_q
    return EtaReport(c_q, single_detector_cq(c_q, e, qq), 0.0, 0.0 if c_q > 0 else None, qq, e, ModelKind.SINGLE)


def ratio(cfg: KcbsConfig, eta, q: QLike) -> float:
    return two_detector_report(cfg, eta, q).ratio


def ratio_linear_fit(cfg: KcbsConfig, q: QLike, eta_grid=DEFAULT_ETA_GRID) -> LinearFit:
    """Fit ``r_q(eta)`` against ``1 - eta`` on a grid of efficiencies close to 1."""
    etas = tuple(float(e) for e in eta_grid)
    if any(not (0.95 < e <= 1.0) for e in etas):
        raise DomainError("efficiency grid must lie in (0.95, 1]")
    ratios = tuple(ratio(cfg, e, q) for e in etas)
    x = 1.0 - np.asarray(etas)
    y = np.asarray(ratios)
    sxx = float(x @ x)
    if sxx == 0.0:
        return LinearFit(None, None, etas, ratios)
    slope = float(x @ y) / sxx
    live = x > 0
    dev = np.abs(y[live] - slope * x[live]) / (slope * x[live])
    return LinearFit(slope, float(dev.max()), etas, ratios)
