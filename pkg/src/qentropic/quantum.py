"""Pure-state models: the spin singlet (CHSH) and the qutrit with five yes/no tests (KCBS)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import DomainError, JointDist

NORM_TOL = 1e-12
# below this the "no" branch of a test is treated as impossible
BRANCH_TOL = 1e-14

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
SPIN_OUTCOMES = (1, -1)
TEST_OUTCOMES = (1, 0)


def _unit_complex(vec, what: str) -> np.ndarray:
    arr = np.array(vec, dtype=complex).reshape(-1)
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > NORM_TOL:
        raise DomainError(f"{what} must have unit norm, got {norm!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        arr = _unit_complex(self.amplitudes, "state")
        if arr.size not in (2, 3, 4):
            raise DomainError(f"state dimension must be 2, 3 or 4, got {arr.size}")
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DichotomicSpinObservable:
    """Spin component ``n . sigma`` along a unit direction, outcomes +1 and -1."""

    direction: np.ndarray

    def __post_init__(self):
        arr = np.array(self.direction, dtype=float).reshape(-1)
        if arr.size != 3 or abs(np.linalg.norm(arr) - 1.0) > NORM_TOL:
            raise DomainError("spin direction must be a unit 3-vector")
        arr.setflags(write=False)
        object.__setattr__(self, "direction", arr)

    @classmethod
    def planar(cls, angle: float) -> "DichotomicSpinObservable":
        """Direction at ``angle`` from the z axis inside the x-z plane."""
        return cls(np.array([math.sin(angle), 0.0, math.cos(angle)]))

    def matrix(self) -> np.ndarray:
        return sum(c * s for c, s in zip(self.direction, PAULI))

    def eigenprojector(self, outcome: int) -> np.ndarray:
        if outcome not in SPIN_OUTCOMES:
            raise DomainError(f"spin outcome must be +1 or -1, got {outcome!r}")
        return 0.5 * (np.eye(2) + outcome * self.matrix())


@dataclass(frozen=True, eq=False)
class RankOneTest:
    """Projector ``|X><X|`` read as a test with outcomes 1 (yes) and 0 (no)."""

    vector: np.ndarray

    def __post_init__(self):
        arr = _unit_complex(self.vector, "test vector")
        if arr.size != 3:
            raise DomainError(f"test vectors are 3-dimensional, got {arr.size}")
        object.__setattr__(self, "vector", arr)

    def amplitude(self, psi) -> complex:
        return complex(np.vdot(self.vector, _amplitudes(psi)))


@dataclass(frozen=True)
class KcbsConfig:
    """Angle ``alpha`` of the five test vectors and angle ``theta`` of the measured state."""

    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        alpha = float(self.alpha)
        if not (0.0 < alpha < math.pi / 4):
            raise DomainError(f"alpha must lie in (0, pi/4), got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "theta", float(self.theta))

    def state(self) -> QuantumState:
        return kcbs_state(self.theta)


def _amplitudes(psi) -> np.ndarray:
    return psi.amplitudes if isinstance(psi, QuantumState) else np.asarray(psi, dtype=complex)


# -- CHSH -------------------------------------------------------------------


def singlet_state() -> QuantumState:
    """``(|01> - |10>) / sqrt(2)``."""
    return QuantumState(np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2))


def spin_pair_joint_dist(
    obs_a: DichotomicSpinObservable, obs_b: DichotomicSpinObservable, state: QuantumState | None = None
) -> JointDist:
    """Born-rule table ``p(a, b)`` for ``A = a.sigma (x) 1`` and ``B = 1 (x) b.sigma``.

    Rows and columns are ordered by outcome ``(+1, -1)``.
    """
    psi = (state or singlet_state()).amplitudes
    if psi.size != 4:
        raise DomainError("two-qubit state required")
    table = np.empty((2, 2))
    for i, a in enumerate(SPIN_OUTCOMES):
        pa = obs_a.eigenprojector(a)
        for k, b in enumerate(SPIN_OUTCOMES):
            proj = np.kron(pa, obs_b.eigenprojector(b))
            table[i, k] = np.vdot(psi, proj @ psi).real
    table = np.clip(table, 0.0, None)
    return JointDist(table / table.sum())


def chsh_joint_dist(angle_ab: float) -> JointDist:
    """Singlet outcome table for two coplanar spin directions at ``angle_ab``."""
    return spin_pair_joint_dist(
        DichotomicSpinObservable.planar(0.0), DichotomicSpinObservable.planar(angle_ab)
    )


def correlation(j: JointDist, outcomes_a=SPIN_OUTCOMES, outcomes_b=SPIN_OUTCOMES) -> float:
    """Mean of the product of outcomes, ``sum a b p(a, b)``."""
    return float(np.asarray(outcomes_a, float) @ j.table @ np.asarray(outcomes_b, float))


def chsh_correlation(angle: float) -> float:
    """``<AB>`` on the singlet; equals ``-cos(angle)``."""
    return correlation(chsh_joint_dist(angle))


# -- KCBS -------------------------------------------------------------------


def kcbs_vector_array(alpha):
    """Real components of the five test vectors, shape ``alpha.shape + (5, 3)``."""
    alpha = np.asarray(alpha, dtype=float)
    c, s = np.cos(alpha), np.sin(alpha)
    r = np.sqrt(np.cos(2.0 * alpha))
    k = 1.0 / (math.sqrt(2.0) * c)
    zero, one = np.zeros_like(alpha), np.ones_like(alpha)
    rows = [
        (k * r, k * s, k * c),
        (zero, c, -s),
        (one, zero, zero),
        (zero, c, s),
        (k * r, k * s, -k * c),
    ]
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def kcbs_state_array(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.sin(theta), np.cos(theta), np.zeros_like(theta)], axis=-1)


def kcbs_vectors(cfg: KcbsConfig | float) -> list[RankOneTest]:
    alpha = cfg.alpha if isinstance(cfg, KcbsConfig) else KcbsConfig(cfg).alpha
    return [RankOneTest(v) for v in kcbs_vector_array(alpha)]


def kcbs_state(theta: float) -> QuantumState:
    """``(sin theta, cos theta, 0)``."""
    return QuantumState(kcbs_state_array(theta))


def sequential_tables(first, second, psi):
    """Batched two-step measurement of rank-one tests.

    ``first``, ``second`` and ``psi`` are arrays with trailing dimension ``d``
    (broadcastable). Returns tables of shape ``(..., 2, 2)`` indexed
    ``[outcome of second, outcome of first]`` with outcome order ``(1, 0)``.
    """
    first = np.asarray(first)
    second = np.asarray(second)
    psi = np.asarray(psi)
    amp = np.sum(np.conj(first) * psi, axis=-1)
    p_yes = np.clip(np.abs(amp) ** 2, 0.0, 1.0)
    p_no = 1.0 - p_yes
    # outcome 1 leaves the system in |first>
    overlap = np.abs(np.sum(np.conj(second) * first, axis=-1)) ** 2
    # outcome 0 leaves the renormalised residual, see post_measurement_state
    residual = psi - amp[..., None] * first
    live = p_no > BRANCH_TOL
    scale = np.where(live, 1.0 / np.sqrt(np.where(live, p_no, 1.0)), 0.0)
    after_no = np.abs(np.sum(np.conj(second) * residual, axis=-1) * scale) ** 2
    after_no = np.where(live, np.clip(after_no, 0.0, 1.0), 0.0)
    overlap = np.clip(overlap, 0.0, 1.0)
    p_no = np.where(live, p_no, 0.0)
    p_yes = 1.0 - p_no
    table = np.empty(np.broadcast(p_yes, after_no).shape + (2, 2))
    table[..., 0, 0] = p_yes * overlap
    table[..., 1, 0] = p_yes * (1.0 - overlap)
    table[..., 0, 1] = p_no * after_no
    table[..., 1, 1] = p_no * (1.0 - after_no)
    return table


def post_measurement_state(test: RankOneTest, psi, outcome: int) -> QuantumState | None:
    """State after ``test`` returned ``outcome``; ``None`` for an impossible outcome."""
    vec = _amplitudes(psi)
    amp = np.vdot(test.vector, vec)
    if outcome == 1:
        return None if abs(amp) ** 2 < BRANCH_TOL else QuantumState(test.vector)
    if outcome != 0:
        raise DomainError(f"test outcome must be 1 or 0, got {outcome!r}")
    p_no = 1.0 - abs(amp) ** 2
    if p_no < BRANCH_TOL:
        return None
    residual = vec - amp * test.vector
    return QuantumState(residual / np.linalg.norm(residual))


def kcbs_sequential_joint(first: RankOneTest, second: RankOneTest, psi) -> JointDist:
    """Measure ``first``, collapse, then measure ``second``.

    Rows index the outcome of ``second`` and columns the outcome of ``first``,
    so :func:`~qentropic.entropy.conditional_entropy` of the result is
    ``H_q(second | first)``.
    """
    vec = _amplitudes(psi)
    if vec.size != 3:
        raise DomainError("qutrit state required")
    return JointDist(sequential_tables(first.vector, second.vector, vec))


def _adjacent(j: int, k: int) -> bool:
    return (j - k) % 5 in (1, 4)


def kcbs_pair_correlation(pair: tuple[int, int], cfg: KcbsConfig, psi=None) -> float:
    """``<X_j X_k>`` for a cyclically adjacent pair of 0-based indices, outcomes mapped 1->+1, 0->-1."""
    j, k = pair
    if not _adjacent(j, k):
        raise DomainError(f"tests {j} and {k} are not jointly measurable")
    vecs = kcbs_vectors(cfg)
    state = cfg.state() if psi is None else psi
    return correlation(kcbs_sequential_joint(vecs[k], vecs[j], state))
