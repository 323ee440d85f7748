"""Exact-arithmetic engine for the q-deformed AKNS-D hierarchy.

Truncated series carriers (XSeries, MatSeries, MZSeries, TimePoly),
q-difference operator algebra with residue pairing, dressing and
resolvent solvers, bilinear residue checks, tau-function shifts, and a
reporting CLI. Everything computes over exact rationals; identities hold
with tolerance zero up to the tracked truncation validity.
"""

from .calculus import (
    ClassicalCalc,
    QCalc,
    dilate,
    exp_q_series,
    exp_series,
    q_antiderive,
    q_derive,
)
from .hierarchy import (
    DiagonalConsistencyError,
    Dressing,
    HierarchySession,
    LaxData,
    Resolvent,
    ResonanceError,
    b_split,
    resolvent_from_dressing,
    solve_dressing,
    solve_resolvent_direct,
    u_flow,
    verify_resolvent,
    verify_zero_curvature,
)
from .matseries import MatSeries
from .qop import (
    QDOp,
    op_adjoint,
    op_apply,
    op_compose,
    pairing_lhs,
    pairing_oracle,
    pairing_rhs,
    q_commutator,
    res_dq,
    residue_pairing,
    shift_x_over_q,
)
from .scalars import frac, frac_str
from .series import XSeries, series_mul
from .timepoly import TimePoly
from .tau import (
    TauSpec,
    TimeContext,
    baker_from_tau,
    classical_limit_check,
    miwa_shift,
    q_shift_times,
    verify_expqo,
    verify_tau_theorem,
)
from .zseries import MZSeries, z_invert, z_mul, z_project, z_residue

__all__ = [
    "ClassicalCalc", "QCalc", "dilate", "exp_q_series", "exp_series",
    "q_antiderive", "q_derive",
    "DiagonalConsistencyError", "Dressing", "HierarchySession", "LaxData",
    "Resolvent", "ResonanceError", "b_split", "resolvent_from_dressing",
    "solve_dressing", "solve_resolvent_direct", "u_flow", "verify_resolvent",
    "verify_zero_curvature",
    "MatSeries", "QDOp", "op_adjoint", "op_apply", "op_compose",
    "pairing_lhs", "pairing_oracle", "pairing_rhs", "q_commutator", "res_dq",
    "residue_pairing", "shift_x_over_q",
    "frac", "frac_str", "XSeries", "series_mul", "TimePoly",
    "TauSpec", "TimeContext", "baker_from_tau", "classical_limit_check",
    "miwa_shift", "q_shift_times", "verify_expqo", "verify_tau_theorem",
    "MZSeries", "z_invert", "z_mul", "z_project", "z_residue",
]

__version__ = "0.1.0"
