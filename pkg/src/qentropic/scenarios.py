"""Cycle scenarios: q-entropic and mean-value noncontextuality inequalities.

Convention for ``n`` observables ``X_1..X_n`` in a cycle: ``cond_entropies``
holds ``H_q(X_j | X_{j+1})`` for ``j = 1..n-1`` followed by ``H_q(X_1 | X_n)``,
and the characteristic quantity is

    C_q = H_q(X_1 | X_n) - sum_{j<n} H_q(X_j | X_{j+1}).

A positive ``C_q`` (with ``q >= 1``) rules out a joint distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import quantum
from .entropy import (
    DomainError,
    QLike,
    as_qorder,
    conditional_entropy,
    conditional_entropy_array,
    joint_entropy,
    mutual_information,
    q_ln,
    tsallis_entropy,
    tsallis_sum,
)
from .quantum import (
    DichotomicSpinObservable,
    KcbsConfig,
    kcbs_sequential_joint,
    kcbs_vectors,
    spin_pair_joint_dist,
)

MAX_CYCLE = 30
ENUMERATION_LIMIT = 20
# cyclic KCBS pairs as (measured second, measured first), 0-based
KCBS_PAIRS = ((0, 1), (1, 2), (2, 3), (3, 4), (0, 4))


class CapacityError(ValueError):
    """Problem size beyond what the implementation handles."""


@dataclass(frozen=True)
class CycleCorrelations:
    correlations: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(c) for c in self.correlations)
        if len(vals) < 3:
            raise DomainError("a cycle needs at least 3 observables")
        if any(not (-1.0 - 1e-12 <= c <= 1.0 + 1e-12) for c in vals):
            raise DomainError("correlations must lie in [-1, 1]")
        object.__setattr__(self, "correlations", vals)

    @property
    def n(self) -> int:
        return len(self.correlations)


@dataclass(frozen=True)
class CycleEntropies:
    cond_entropies: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(h) for h in self.cond_entropies)
        if len(vals) < 3:
            raise DomainError("a cycle needs at least 3 observables")
        if any(h < -1e-12 for h in vals):
            raise DomainError("conditional entropies must be non-negative")
        object.__setattr__(self, "cond_entropies", vals)

    @property
    def n(self) -> int:
        return len(self.cond_entropies)


@dataclass(frozen=True)
class ViolationReport:
    c_q: float
    c_q_relative: float
    q: float
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def violated(self) -> bool:
        return self.c_q > 0.0

    @classmethod
    def build(cls, c_q: float, q: QLike, **params) -> "ViolationReport":
        qq = as_qorder(q).q
        return cls(float(c_q), float(c_q) / q_ln(2.0, qq), qq, params)


@dataclass(frozen=True)
class PolytopeVerdict:
    violated: bool
    lhs: float
    signs: tuple[int, ...]
    margin: float

    @property
    def verdict(self) -> str:
        return "violated" if self.violated else "inside"


def cycle_entropic_lhs(e: CycleEntropies | list[float]) -> float:
    vals = e.cond_entropies if isinstance(e, CycleEntropies) else CycleEntropies(e).cond_entropies
    return vals[-1] - math.fsum(vals[:-1])


def braunstein_caves_check(e: CycleEntropies | list[float]) -> bool:
    """True when ``H(A|B) <= H(A|B') + H(B'|A') + H(A'|B)``.

    Entries follow the cycle ``A, B', A', B``: ``[H(A|B'), H(B'|A'), H(A'|B), H(A|B)]``.
    """
    vals = e.cond_entropies if isinstance(e, CycleEntropies) else CycleEntropies(e).cond_entropies
    if len(vals) != 4:
        raise DomainError("the four-observable cycle is required")
    return vals[3] <= vals[0] + vals[1] + vals[2]


# -- CHSH ------------------------------------------------------------------


def chsh_directions(gamma: float) -> dict[str, DichotomicSpinObservable]:
    """Coplanar settings at 0, gamma/3, 2 gamma/3, gamma for A, B', A', B."""
    return {
        name: DichotomicSpinObservable.planar(k * gamma / 3.0)
        for k, name in enumerate(("A", "B'", "A'", "B"))
    }


def chsh_pair_tables(gamma: float) -> dict[str, Any]:
    """Joint tables for the four compatible pairs; key ``"X|Y"`` is indexed ``[x, y]``."""
    d = chsh_directions(gamma)
    return {
        "A|B": spin_pair_joint_dist(d["A"], d["B"]),
        "A|B'": spin_pair_joint_dist(d["A"], d["B'"]),
        "B'|A'": spin_pair_joint_dist(d["A'"], d["B'"]).transpose(),
        "A'|B": spin_pair_joint_dist(d["A'"], d["B"]),
    }


def chsh_cycle_entropies(gamma: float, q: QLike) -> CycleEntropies:
    t = chsh_pair_tables(gamma)
    return CycleEntropies(
        [conditional_entropy(t[k], q) for k in ("A|B'", "B'|A'", "A'|B", "A|B")]
    )


def chsh_cq(gamma: float, q: QLike) -> ViolationReport:
    """``C_q = H_q(A|B) - 3 H_q(B'|A')`` on the singlet; the pair at gamma, the rest at gamma/3."""
    if not 0.0 < gamma < math.pi:
        raise DomainError(f"gamma must lie in (0, pi), got {gamma!r}")
    wide = quantum.chsh_joint_dist(gamma)
    narrow = quantum.chsh_joint_dist(gamma / 3.0)
    c = conditional_entropy(wide, q) - 3.0 * conditional_entropy(narrow, q)
    return ViolationReport.build(c, q, gamma=float(gamma))


def chsh_cq_array(gamma, q: float):
    """Closed-form batched ``C_q(gamma)``; used by scans and cross-checked against :func:`chsh_cq`."""
    gamma = np.asarray(gamma, dtype=float)

    def cond(angle):
        p = np.cos(angle / 2.0) ** 2
        return 2.0 * 0.5**q * tsallis_sum(np.stack([p, 1.0 - p], axis=-1), q)

    return cond(gamma) - 3.0 * cond(gamma / 3.0)


def chsh_mutual_info_form(gamma: float, q: QLike) -> float:
    """``I(A:B') + I(A':B') + I(A':B) - I(A:B) - H(A') - H(B')``."""
    d = chsh_directions(gamma)
    ab = spin_pair_joint_dist(d["A"], d["B"])
    abp = spin_pair_joint_dist(d["A"], d["B'"])
    apbp = spin_pair_joint_dist(d["A'"], d["B'"])
    apb = spin_pair_joint_dist(d["A'"], d["B"])
    return (
        mutual_information(abp, q)
        + mutual_information(apbp, q)
        + mutual_information(apb, q)
        - mutual_information(ab, q)
        - tsallis_entropy(apbp.marginal_a(), q)
        - tsallis_entropy(apbp.marginal_b(), q)
    )


# -- KCBS ------------------------------------------------------------------


def kcbs_pair_tables(cfg: KcbsConfig) -> dict[tuple[int, int], Any]:
    """Sequential tables for the five cyclic pairs ``(j, k)``: ``X_k`` measured first."""
    vecs = kcbs_vectors(cfg)
    psi = cfg.state()
    return {(j, k): kcbs_sequential_joint(vecs[k], vecs[j], psi) for j, k in KCBS_PAIRS}


def kcbs_cycle_entropies(cfg: KcbsConfig, q: QLike) -> CycleEntropies:
    tables = kcbs_pair_tables(cfg)
    return CycleEntropies([conditional_entropy(tables[p], q) for p in KCBS_PAIRS])


def kcbs_cq(cfg: KcbsConfig, q: QLike) -> ViolationReport:
    """``C_q = H(X1|X5) - H(X1|X2) - H(X2|X3) - H(X3|X4) - H(X4|X5)``."""
    c = cycle_entropic_lhs(kcbs_cycle_entropies(cfg, q))
    return ViolationReport.build(c, q, alpha=cfg.alpha, theta=cfg.theta)


def kcbs_joint_form(cfg: KcbsConfig, q: QLike) -> float:
    """``sum_{j<5} H(X_j, X_{j+1}) - H(X_1, X_5) - H(X_2) - H(X_3) - H(X_4)``; equals ``-C_q``."""
    tables = kcbs_pair_tables(cfg)
    pairs = math.fsum(joint_entropy(tables[p], q) for p in KCBS_PAIRS[:4])
    # X_{k} for k = 2, 3, 4 is the first-measured member of pairs (1,2), (2,3), (3,4)
    singles = math.fsum(tsallis_entropy(tables[p].marginal_b(), q) for p in KCBS_PAIRS[:3])
    return pairs - joint_entropy(tables[(0, 4)], q) - singles


def kcbs_tables_array(alpha, theta):
    """Batched sequential tables, shape ``broadcast(alpha, theta).shape + (5, 2, 2)`` in ``KCBS_PAIRS`` order."""
    alpha, theta = np.broadcast_arrays(np.asarray(alpha, float), np.asarray(theta, float))
    vecs = quantum.kcbs_vector_array(alpha)
    psi = quantum.kcbs_state_array(theta)
    return np.stack(
        [quantum.sequential_tables(vecs[..., k, :], vecs[..., j, :], psi) for j, k in KCBS_PAIRS],
        axis=-3,
    )


def kcbs_cq_array(alpha, theta, q: float):
    """Batched ``C_q`` over broadcast ``alpha``/``theta`` arrays."""
    h = conditional_entropy_array(kcbs_tables_array(alpha, theta), q)
    return h[..., 4] - h[..., :4].sum(axis=-1)


def kcbs_marginals_array(alpha, theta):
    """``|<X_k|psi>|^2`` for the five tests, last axis of length 5."""
    alpha, theta = np.broadcast_arrays(np.asarray(alpha, float), np.asarray(theta, float))
    vecs = quantum.kcbs_vector_array(alpha)
    psi = quantum.kcbs_state_array(theta)
    return np.einsum("...kd,...d->...k", vecs, psi) ** 2


def kcbs_correlations(cfg: KcbsConfig) -> CycleCorrelations:
    """``<X_j X_{j+1}>`` around the pentagon with outcomes mapped 1->+1, 0->-1."""
    tables = kcbs_pair_tables(cfg)
    sign = (1, -1)
    return CycleCorrelations(
        [quantum.correlation(tables[p], sign, sign) for p in KCBS_PAIRS]
    )


# -- classical models --------------------------------------------------------


def _as_cycle_joint(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim < 3:
        raise DomainError("joint distribution over at least 3 observables required")
    if abs(p.sum() - 1.0) > 1e-12 or np.any(p < 0):
        raise DomainError("not a probability distribution")
    return p


def pair_marginal(p, j: int, k: int) -> np.ndarray:
    """Two-observable marginal ``p(x_j, x_k)`` (rows ``x_j``) of an n-way table."""
    p = _as_cycle_joint(p)
    others = tuple(ax for ax in range(p.ndim) if ax not in (j, k))
    m = p.sum(axis=others)
    return m if j < k else m.T


def cycle_entropies_from_joint(p, q: QLike) -> CycleEntropies:
    """Conditional entropies of the cycle read off one global joint distribution."""
    p = _as_cycle_joint(p)
    n = p.ndim
    vals = [conditional_entropy(pair_marginal(p, j, j + 1), q) for j in range(n - 1)]
    vals.append(conditional_entropy(pair_marginal(p, 0, n - 1), q))
    return CycleEntropies(vals)


def cycle_correlations_from_joint(p, values=None) -> CycleCorrelations:
    """``<X_j X_{j+1}>`` for a joint distribution; outcome index ``i`` maps to ``values[i]``.

    Default values are ``(+1, -1)``, matching outcome order ``(1, 0)``.
    """
    p = _as_cycle_joint(p)
    n = p.ndim
    vals = np.asarray(values if values is not None else (1.0, -1.0), dtype=float)
    out = []
    for j in range(n):
        k = (j + 1) % n
        m = pair_marginal(p, min(j, k), max(j, k))
        out.append(float(vals[: m.shape[0]] @ m @ vals[: m.shape[1]]))
    return CycleCorrelations(out)


# -- n-cycle polytope -------------------------------------------------------


def odd_sign_vectors(n: int) -> np.ndarray:
    """All sign vectors with an odd number of -1 entries, ordered by bitmask (bit j set = -1)."""
    masks = _odd_masks(n)
    return 1 - 2 * ((masks[:, None] >> np.arange(n)) & 1)


def _odd_masks(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros(masks.size, dtype=np.int64)
    for j in range(n):
        parity ^= (masks >> j) & 1
    return masks[parity == 1]


def _best_sign_enumerated(c: np.ndarray):
    masks = _odd_masks(c.size)
    lhs = np.full(masks.size, math.fsum(c))
    for j, cj in enumerate(c):
        lhs -= 2.0 * cj * ((masks >> j) & 1)
    i = int(np.argmax(lhs))  # first maximum, i.e. lowest bitmask
    signs = 1 - 2 * ((int(masks[i]) >> np.arange(c.size)) & 1)
    return float(lhs[i]), tuple(int(s) for s in signs)


def _best_sign_greedy(c: np.ndarray):
    signs = np.where(c < 0, -1, 1)
    if np.count_nonzero(signs < 0) % 2 == 0:
        j = int(np.argmin(np.abs(c)))
        signs[j] = -signs[j]
    return float(signs @ c), tuple(int(s) for s in signs)


def cycle_polytope_check(c: CycleCorrelations | list[float]) -> PolytopeVerdict:
    """Test ``sum_j g_j <X_j X_{j+1}> <= n - 2`` over every odd-negative sign vector.

    Returns the largest left-hand side, the sign vector attaining it and
    ``margin = n - 2 - lhs``. Cycles up to ``ENUMERATION_LIMIT`` are
    enumerated exhaustively; larger ones (up to ``MAX_CYCLE``) use the exact
    greedy maximiser.
    """
    corr = c if isinstance(c, CycleCorrelations) else CycleCorrelations(c)
    n = corr.n
    if n > MAX_CYCLE:
        raise CapacityError(f"n = {n} exceeds the supported cycle length {MAX_CYCLE}")
    vec = np.asarray(corr.correlations)
    if n <= ENUMERATION_LIMIT:
        lhs, signs = _best_sign_enumerated(vec)
    else:
        lhs, signs = _best_sign_greedy(vec)
    margin = (n - 2) - lhs
    return PolytopeVerdict(margin < -1e-12, lhs, signs, margin)
