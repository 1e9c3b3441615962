"""Tsallis q-entropies of discrete distributions.

All quantities are in nats. Zero-probability entries contribute nothing,
which is the limit value of ``p**q * ln_q(p)`` as ``p -> 0``.

The q-logarithm is evaluated as ``expm1((1 - q) * ln x) / (1 - q)``, which is
accurate close to ``q = 1``; inside ``|q - 1| < Q_ONE_TOL`` the Shannon
formulas are used outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

Q_ONE_TOL = 1e-9
NORM_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class QOrder:
    """Entropic order ``q > 0``."""

    q: float

    def __post_init__(self):
        q = float(self.q)
        if not (q > 0.0) or not math.isfinite(q):
            raise DomainError(f"entropic order must be a finite q > 0, got {self.q!r}")
        object.__setattr__(self, "q", q)

    def supports_bell_inequalities(self) -> bool:
        # conditioning reduces entropy only for q >= 1
        return self.q >= 1.0

    @property
    def is_shannon(self) -> bool:
        return abs(self.q - 1.0) < Q_ONE_TOL

    def __float__(self) -> float:
        return self.q


QLike = Union[QOrder, float, int]


def as_qorder(q: QLike) -> QOrder:
    return q if isinstance(q, QOrder) else QOrder(q)


def _check_probabilities(arr: np.ndarray, what: str) -> None:
    if arr.size == 0:
        raise DomainError(f"{what} is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} contains non-finite entries")
    if np.any(arr < -NORM_TOL) or np.any(arr > 1.0 + NORM_TOL):
        raise DomainError(f"{what} has entries outside [0, 1]")
    total = float(arr.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(f"{what} sums to {total!r}, not 1 (tolerance {NORM_TOL})")


@dataclass(frozen=True, eq=False)
class ProbDist:
    """Finite probability vector."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float).reshape(-1)
        _check_probabilities(arr, "probability vector")
        arr = np.clip(arr, 0.0, 1.0)
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True, eq=False)
class JointDist:
    """Two-variable table ``p(a, b)``; rows index ``a``, columns index ``b``."""

    table: np.ndarray

    def __post_init__(self):
        arr = np.array(self.table, dtype=float)
        if arr.ndim != 2:
            raise DomainError(f"joint table must be 2-dimensional, got shape {arr.shape}")
        _check_probabilities(arr, "joint table")
        arr = np.clip(arr, 0.0, 1.0)
        arr.setflags(write=False)
        object.__setattr__(self, "table", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape

    def marginal_a(self) -> ProbDist:
        return ProbDist(self.table.sum(axis=1))

    def marginal_b(self) -> ProbDist:
        return ProbDist(self.table.sum(axis=0))

    def transpose(self) -> "JointDist":
        return JointDist(self.table.T)

    @classmethod
    def product(cls, pa, pb) -> "JointDist":
        return cls(np.outer(_probs(pa), _probs(pb)))


@dataclass(frozen=True)
class Efficiency:
    """Detector efficiency ``eta`` in ``[0, 1]``."""

    eta: float

    def __post_init__(self):
        eta = float(self.eta)
        if not (0.0 <= eta <= 1.0):
            raise DomainError(f"efficiency must lie in [0, 1], got {self.eta!r}")
        object.__setattr__(self, "eta", eta)

    def __float__(self) -> float:
        return self.eta


def as_eta(eta) -> float:
    return float(eta) if isinstance(eta, Efficiency) else Efficiency(eta).eta


def _probs(p) -> np.ndarray:
    if isinstance(p, ProbDist):
        return p.probs
    return ProbDist(p).probs


def _table(j) -> np.ndarray:
    if isinstance(j, JointDist):
        return j.table
    return JointDist(j).table


# -- vectorized kernels ------------------------------------------------------
# These accept raw arrays without validation; the public functions validate.


def _qlog(x, q: float):
    x = np.asarray(x, dtype=float)
    if abs(q - 1.0) < Q_ONE_TOL:
        return np.log(x)
    return np.expm1((1.0 - q) * np.log(x)) / (1.0 - q)


def tsallis_sum(p, q: float, axis=-1):
    """Entropy of the (unnormalised) weights along ``axis``: ``sum p ln_q(1/p)``.

    Works on any array shape; used directly by the batched scan code.
    """
    p = np.asarray(p, dtype=float)
    pos = p > 0.0
    log_p = np.log(np.where(pos, p, 1.0))
    if abs(q - 1.0) < Q_ONE_TOL:
        terms = -p * log_p
    else:
        # ln_q(1/p) = expm1((q - 1) ln p) / (1 - q); avoids forming 1/p
        terms = p * np.expm1((q - 1.0) * log_p) / (1.0 - q)
    return np.where(pos, terms, 0.0).sum(axis=axis)


def binary_entropy_array(x, q: float):
    x = np.asarray(x, dtype=float)
    return tsallis_sum(np.stack([x, 1.0 - x], axis=-1), q)


def conditional_entropy_array(table, q: float):
    """``H_q(A|B)`` for tables of shape ``(..., nA, nB)``."""
    table = np.asarray(table, dtype=float)
    pb = table.sum(axis=-2)
    pos = pb > 0.0
    safe = np.where(pos, pb, 1.0)
    cond = table / safe[..., None, :]
    per_b = tsallis_sum(cond, q, axis=-2)
    weight = np.where(pos, safe**q, 0.0)
    return (weight * per_b).sum(axis=-1)


# -- public API --------------------------------------------------------------


def q_ln(x: float, q: QLike) -> float:
    """q-logarithm ``(x**(1-q) - 1) / (1 - q)``, equal to ``ln x`` at ``q = 1``."""
    qq = as_qorder(q).q
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"q-logarithm needs x > 0, got {x!r}")
    return float(_qlog(x, qq))


def tsallis_entropy(p, q: QLike) -> float:
    """Tsallis entropy ``H_q = (sum p**q - 1) / (1 - q)``.

    Args:
        p: a :class:`ProbDist` or anything convertible to one.
        q: entropic order.

    Returns:
        The entropy in nats; Shannon entropy when ``q == 1``.
    """
    return float(tsallis_sum(_probs(p), as_qorder(q).q))


def joint_entropy(j, q: QLike) -> float:
    return float(tsallis_sum(_table(j).reshape(-1), as_qorder(q).q))


def conditional_entropy(j, q: QLike) -> float:
    """``H_q(A|B) = sum_b p(b)**q H_q(A|b)``, conditioning on the column index.

    Columns with ``p(b) = 0`` contribute nothing.
    """
    return float(conditional_entropy_array(_table(j), as_qorder(q).q))


def mutual_information(j, q: QLike) -> float:
    """Mutual q-information ``I_q(A:B) = H_q(A) - H_q(A|B)``."""
    table = _table(j)
    qq = as_qorder(q).q
    return float(tsallis_sum(table.sum(axis=1), qq) - conditional_entropy_array(table, qq))


def binary_q_entropy(eta, q: QLike) -> float:
    """``h_q(eta) = -eta**q ln_q(eta) - (1 - eta)**q ln_q(1 - eta)``."""
    return float(binary_entropy_array(as_eta(eta), as_qorder(q).q))


def eta_deform_entropy(h_a: float, eta, q: QLike) -> float:
    """Entropy of ``{eta p(a)} U {1 - eta}`` from the entropy ``h_a`` of ``p``."""
    e = as_eta(eta)
    qq = as_qorder(q).q
    return e**qq * h_a + binary_q_entropy(e, qq)


def eta_eta_deform_entropy(h_a: float, h_b: float, h_c: float, eta, q: QLike) -> float:
    """Entropy of ``{eta^2 p(a)} U {eta(1-eta) p(b)} U {eta(1-eta) p(c)} U {(1-eta)^2}``.

    ``h_a``, ``h_b``, ``h_c`` are the entropies of the three source distributions.
    """
    e = as_eta(eta)
    qq = as_qorder(q).q
    eq, fq = e**qq, (1.0 - e) ** qq
    return eq * eq * h_a + eq * fq * (h_b + h_c) + (eq + fq + 1.0) * binary_q_entropy(e, qq)


def chain_rule_residual(j, q: QLike) -> float:
    """Largest violation of ``H(A,B) = H(B|A) + H(A) = H(A|B) + H(B)``.

    A self-check utility; any valid table should give roundoff-level output.
    """
    table = _table(j)
    qq = as_qorder(q).q
    h_ab = tsallis_sum(table.reshape(-1), qq)
    h_a = tsallis_sum(table.sum(axis=1), qq)
    h_b = tsallis_sum(table.sum(axis=0), qq)
    r1 = h_ab - conditional_entropy_array(table.T, qq) - h_a
    r2 = h_ab - conditional_entropy_array(table, qq) - h_b
    return float(max(abs(r1), abs(r2)))
