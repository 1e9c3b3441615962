"""q-entropic Bell and noncontextuality inequalities for the CHSH and KCBS scenarios."""

from .entropy import (
    DomainError,
    Efficiency,
    JointDist,
    ProbDist,
    QOrder,
    binary_q_entropy,
    chain_rule_residual,
    conditional_entropy,
    eta_deform_entropy,
    eta_eta_deform_entropy,
    joint_entropy,
    mutual_information,
    q_ln,
    tsallis_entropy,
)
from .quantum import KcbsConfig, QuantumState, RankOneTest
from .scenarios import (
    CycleCorrelations,
    CycleEntropies,
    ViolationReport,
    chsh_cq,
    cycle_entropic_lhs,
    cycle_polytope_check,
    kcbs_cq,
)

__version__ = "0.1.0"
