"""Physical and scheme-theoretic observables: energy, cross helicity,
G/F-norm bookkeeping, conservation-identity residuals, divergence monitors.

The pair quadratic form uses the G-stability matrix [[3/2, -3/4], [-3/4, 1/2]]
expanded scalarly, and the damping form uses F = 3I.  The per-step identity
residuals evaluate the time terms through the backward-difference stencil
paired with the interp_F combination; the algebraic equivalence of that form
with the G/F telescoping form is itself enforced by g_identity_residual and
the mixed-pair analogue, so the residuals stay well-conditioned even when the
telescoped increments nearly cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from tfmhd.grid import (
    VectorField2,
    grad_inner,
    h1_seminorm_sq,
    inner_product,
    l2_norm,
    relative_divergence,
)
from tfmhd.mhd import SolverParams
from tfmhd.stepper import StateHistory, StepReport, bdf2_stencil, interp_F

#: Columns serialized to one diagnostics CSV row, in order.
CSV_COLUMNS = (
    "step",
    "t",
    "energy",
    "cross_helicity",
    "g_energy_u",
    "g_energy_b",
    "f_damp_u",
    "f_damp_b",
    "energy_identity_residual",
    "helicity_identity_residual",
    "div_u",
    "div_b",
    "picard_iters",
)


@dataclass(frozen=True)
class DiagRecord:
    """Per-step diagnostics row.

    g_cross and f_cross back the telescoped cross-helicity balance; they are
    kept in memory for the conservation checks but are not CSV columns.
    """

    step: int
    t: float
    energy: float
    cross_helicity: float
    g_energy_u: float
    g_energy_b: float
    f_damp_u: float
    f_damp_b: float
    energy_identity_residual: float
    helicity_identity_residual: float
    div_u: float
    div_b: float
    picard_iters: int
    g_cross: float = 0.0
    f_cross: float = 0.0

    def csv_values(self) -> tuple:
        return tuple(getattr(self, name) for name in CSV_COLUMNS)


def energy(u: VectorField2, B: VectorField2, s: float) -> float:
    """Model energy (1/2)(||u||^2 + s ||B||^2)."""
    return 0.5 * (l2_norm(u) ** 2 + s * l2_norm(B) ** 2)


def cross_helicity(u: VectorField2, B: VectorField2) -> float:
    """Cross helicity (1/2) (u, B)."""
    return 0.5 * inner_product(u, B)


def g_pair_norm_sq(w_new, w_old) -> float:
    """Pair energy (3/2)||w_new||^2 - (3/2)(w_new, w_old) + (1/2)||w_old||^2.

    Can sink well below the new level's plain energy (down to the lower
    sandwich bound) but the pair matrix is positive definite, so it stays
    nonnegative.
    """
    return (
        1.5 * inner_product(w_new, w_new)
        - 1.5 * inner_product(w_new, w_old)
        + 0.5 * inner_product(w_old, w_old)
    )


def g_pair_mixed(u_new, u_old, b_new, b_old) -> float:
    """Mixed pair form ((u_new, u_old), G (b_new, b_old)); symmetric in (u, B)."""
    return (
        1.5 * inner_product(u_new, b_new)
        - 0.75 * inner_product(u_new, b_old)
        - 0.75 * inner_product(u_old, b_new)
        + 0.5 * inner_product(u_old, b_old)
    )


def f_norm_sq(w) -> float:
    """Damping form 3 ||w||^2 (the F = 3I quadratic form)."""
    return 3.0 * inner_product(w, w)


def f_inner(a, b) -> float:
    """F-weighted pairing 3 (a, b)."""
    return 3.0 * inner_product(a, b)


def _normalized(total: float, terms) -> float:
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(total) / scale


def _normalized_with_bounds(values, bounds) -> float:
    """Scale-free residual with Cauchy-Schwarz majorants of the terms.

    Each bound dominates its term mathematically, so the scale never
    collapses below the fields' magnitude when terms vanish by orthogonality
    (e.g. cross-helicity terms of fields with disjoint frequency content).
    """
    scale = max(max(abs(v) for v in values), max(bounds))
    if scale == 0.0:
        return 0.0
    return abs(sum(values)) / scale


def g_identity_residual(w_new, w_curr, w_prev, dt: float) -> float:
    """Residual of the stencil/pair-energy identity; pure algebra, any triple.

    (stencil/dt, interp_F) must equal the pair-energy increment over dt plus
    a quarter of the F-damping of the second difference over dt.
    """
    lhs = inner_product(bdf2_stencil(w_new, w_curr, w_prev), interp_F(w_new, w_curr, w_prev)) / dt
    g_new = g_pair_norm_sq(w_new, w_curr) / dt
    g_old = g_pair_norm_sq(w_curr, w_prev) / dt
    damp = 0.25 * f_norm_sq(w_new - w_curr * 2.0 + w_prev) / dt
    rhs = g_new - g_old + damp
    return _normalized(lhs - rhs, (lhs, g_new, g_old, damp))


def g_pair_mixed_identity_residual(u_triple, b_triple, dt: float) -> float:
    """Residual of the mixed-pair analogue of the stencil identity.

    (stencil_u/dt, interp_F[B]) + (stencil_B/dt, interp_F[u]) equals the
    increment of both mixed pair forms plus half the F-weighted pairing of
    the second differences, all over dt.
    """
    u2, u1, u0 = u_triple
    b2, b1, b0 = b_triple
    lhs = (
        inner_product(bdf2_stencil(u2, u1, u0), interp_F(b2, b1, b0))
        + inner_product(bdf2_stencil(b2, b1, b0), interp_F(u2, u1, u0))
    ) / dt
    g_new = 2.0 * g_pair_mixed(u2, u1, b2, b1) / dt
    g_old = 2.0 * g_pair_mixed(u1, u0, b1, b0) / dt
    damp = 0.5 * f_inner(u2 - u1 * 2.0 + u0, b2 - b1 * 2.0 + b0) / dt
    rhs = g_new - g_old + damp
    return _normalized(lhs - rhs, (lhs, g_new, g_old, damp))


def g_bounds_check(w_new, w_old, slack: float = 1e-12) -> tuple[bool, bool]:
    """Pair-energy sandwich between weighted norms of the two levels.

    (3/4)||w_new||^2 - (1/4)||w_old||^2 <= g <= (9/4)||w_new||^2 + (5/4)||w_old||^2,
    both from Young's inequality on the cross term with unit weight; the lower
    bound is tight for aligned pairs, the upper for anti-aligned pairs.
    """
    g = g_pair_norm_sq(w_new, w_old)
    nn = inner_product(w_new, w_new)
    no = inner_product(w_old, w_old)
    tol = slack * max(nn, no, 1.0)
    lower_ok = g >= 0.75 * nn - 0.25 * no - tol
    upper_ok = g <= 2.25 * nn + 1.25 * no + tol
    return lower_ok, upper_ok


def energy_identity_residual(
    u_triple, b_triple, params: SolverParams, f_next: VectorField2, g_next: VectorField2
) -> float:
    """Residual of the per-step energy balance of the filtered scheme.

    Stencil-paired time terms plus dissipation of the interp_F fields minus
    the work of the forcings; zero to solver tolerance on converged steps of
    the filtered scheme.
    """
    dt, s = params.dt, params.s
    u2, u1, u0 = u_triple
    b2, b1, b0 = b_triple
    fu = interp_F(u2, u1, u0)
    fb = interp_F(b2, b1, b0)
    st_u = bdf2_stencil(u2, u1, u0)
    st_b = bdf2_stencil(b2, b1, b0)
    t_u = inner_product(st_u, fu)
    t_b = s * inner_product(st_b, fb)
    d_u = dt * params.re_inv * h1_seminorm_sq(fu)
    d_b = dt * s * params.rem_inv * h1_seminorm_sq(fb)
    w_u = -dt * inner_product(f_next, fu)
    w_b = -s * dt * inner_product(g_next, fb)
    bounds = (
        l2_norm(st_u) * l2_norm(fu),
        s * l2_norm(st_b) * l2_norm(fb),
        d_u,
        d_b,
        dt * l2_norm(f_next) * l2_norm(fu),
        s * dt * l2_norm(g_next) * l2_norm(fb),
    )
    return _normalized_with_bounds((t_u, t_b, d_u, d_b, w_u, w_b), bounds)


def helicity_identity_residual(
    u_triple, b_triple, params: SolverParams, f_next: VectorField2, g_next: VectorField2
) -> float:
    """Residual of the per-step cross-helicity balance of the filtered scheme.

    The time part pairs each field's stencil with the other field's interp_F
    combination; the dissipative part couples the gradients of both interp_F
    fields through the sum of the inverse Reynolds numbers.
    """
    dt = params.dt
    u2, u1, u0 = u_triple
    b2, b1, b0 = b_triple
    fu = interp_F(u2, u1, u0)
    fb = interp_F(b2, b1, b0)
    st_u = bdf2_stencil(u2, u1, u0)
    st_b = bdf2_stencil(b2, b1, b0)
    t_ub = inner_product(st_u, fb)
    t_bu = inner_product(st_b, fu)
    d_x = dt * (params.re_inv + params.rem_inv) * grad_inner(fu, fb)
    w_u = -dt * inner_product(f_next, fb)
    w_b = -dt * inner_product(g_next, fu)
    grad_scale = dt * (params.re_inv + params.rem_inv)
    bounds = (
        l2_norm(st_u) * l2_norm(fb),
        l2_norm(st_b) * l2_norm(fu),
        grad_scale * math.sqrt(h1_seminorm_sq(fu) * h1_seminorm_sq(fb)),
        dt * l2_norm(f_next) * l2_norm(fb),
        dt * l2_norm(g_next) * l2_norm(fu),
    )
    return _normalized_with_bounds((t_ub, t_bu, d_x, w_u, w_b), bounds)


def record(
    step: int,
    state: StateHistory,
    params: SolverParams,
    forcing_pair: tuple[VectorField2, VectorField2],
    report: Optional[StepReport] = None,
    prev_state: Optional[StateHistory] = None,
) -> DiagRecord:
    """Assemble the diagnostics row after a step.

    ``state`` holds the (n, n+1) levels just produced; ``prev_state`` (the
    history before the step) supplies the n-1 level that the second
    differences and identity residuals need.  Without it those fields are
    reported as zero, which is the convention for the startup rows.
    """
    u2, u1 = state.u_curr, state.u_prev
    b2, b1 = state.b_curr, state.b_prev
    f_next, g_next = forcing_pair

    f_damp_u = f_damp_b = f_cross = 0.0
    e_resid = h_resid = 0.0
    if prev_state is not None:
        u0, b0 = prev_state.u_prev, prev_state.b_prev
        i_u = u2 - u1 * 2.0 + u0
        i_b = b2 - b1 * 2.0 + b0
        f_damp_u = f_norm_sq(i_u)
        f_damp_b = f_norm_sq(i_b)
        f_cross = f_inner(i_u, i_b)
        e_resid = energy_identity_residual((u2, u1, u0), (b2, b1, b0), params, f_next, g_next)
        h_resid = helicity_identity_residual((u2, u1, u0), (b2, b1, b0), params, f_next, g_next)

    return DiagRecord(
        step=step,
        t=state.t_n,
        energy=energy(u2, b2, params.s),
        cross_helicity=cross_helicity(u2, b2),
        g_energy_u=g_pair_norm_sq(u2, u1),
        g_energy_b=g_pair_norm_sq(b2, b1),
        f_damp_u=f_damp_u,
        f_damp_b=f_damp_b,
        energy_identity_residual=e_resid,
        helicity_identity_residual=h_resid,
        div_u=relative_divergence(u2),
        div_b=relative_divergence(b2),
        picard_iters=report.picard_iters if report is not None else 0,
        g_cross=2.0 * g_pair_mixed(u2, u1, b2, b1),
        f_cross=f_cross,
    )


def initial_record(u0: VectorField2, b0: VectorField2, params: SolverParams) -> DiagRecord:
    """Row for the initial data; no pair or identity quantities exist yet."""
    return DiagRecord(
        step=0,
        t=0.0,
        energy=energy(u0, b0, params.s),
        cross_helicity=cross_helicity(u0, b0),
        g_energy_u=0.0,
        g_energy_b=0.0,
        f_damp_u=0.0,
        f_damp_b=0.0,
        energy_identity_residual=0.0,
        helicity_identity_residual=0.0,
        div_u=relative_divergence(u0),
        div_b=relative_divergence(b0),
        picard_iters=0,
    )
