"""Time integrators: implicit solve, modular time filter, combined form, startup.

One step has two parts.  Step 1 is a fully implicit backward Euler solve for
provisional fields, done by Picard fixed-point iteration with the stiff
linear part inverted exactly per Fourier mode.  Step 2 post-processes each
variable w through the filter

    w_new = w_tilde - (w_tilde - 2 w_curr + w_prev) / 3,

which lifts the scheme to second order.  The combined formulation solves the
equivalent one-step system whose time derivative is the two-step backward
difference and whose space terms are evaluated at the extrapolation
interp_F(w) = (3/2) w_new - w_curr + (1/2) w_prev; both formulations must
produce the same trajectory to solver tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from tfmhd.grid import (
    Grid,
    ScalarField,
    VectorField2,
    dealias,
    divergence,
    laplacian,
    leray_project,
    l2_norm,
)
from tfmhd.mhd import SolverParams, momentum_nonlinear, nonlinear_pair, zero_forcing

ForcingFn = Callable[[Grid, float], tuple[VectorField2, VectorField2]]


class NonConvergence(RuntimeError):
    """Picard iteration hit its cap; the time step is too large to contract."""

    def __init__(self, iterations: int, residual: float, t: float | None = None):
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(
            f"fixed-point iteration failed to converge{where}: "
            f"residual {residual:.3e} after {iterations} iterations"
        )
        self.iterations = iterations
        self.residual = residual
        self.t = t


@dataclass(frozen=True)
class StepReport:
    """Bookkeeping for one implicit solve."""

    picard_iters: int
    picard_residual: float
    dt_used: float


@dataclass(frozen=True)
class StateHistory:
    """The two retained time levels; t_n is the time of the *_curr levels.

    Pressure levels are present only when pressure recovery is enabled.
    """

    t_n: float
    u_prev: VectorField2
    u_curr: VectorField2
    b_prev: VectorField2
    b_curr: VectorField2
    p_prev: Optional[ScalarField] = None
    p_curr: Optional[ScalarField] = None

    @property
    def grid(self) -> Grid:
        return self.u_curr.grid


def apply_filter(w_tilde, w_curr, w_prev):
    """Second-difference post-step filter; linear, inactive on linear-in-time data."""
    return w_tilde - (w_tilde - 2.0 * w_curr + w_prev) * (1.0 / 3.0)


def interp_F(w_next, w_curr, w_prev):
    """Extrapolation (3/2) w_next - w_curr + (1/2) w_prev; inverse of the filter."""
    return w_next * 1.5 - w_curr + w_prev * 0.5


def bdf2_stencil(w_next, w_curr, w_prev):
    """Backward-difference combination (3/2) w_next - 2 w_curr + (1/2) w_prev."""
    return w_next * 1.5 - w_curr * 2.0 + w_prev * 0.5


def _solve_helmholtz(w: VectorField2, c0: float, visc: float) -> VectorField2:
    """Invert (c0 - visc * laplacian) per mode; diagonal in spectral space."""
    g = w.grid
    denom = c0 + visc * g.k2
    return VectorField2(
        ScalarField.from_spectral(g, w.x.spec / denom, dealiased=w.x.dealiased),
        ScalarField.from_spectral(g, w.y.spec / denom, dealiased=w.y.dealiased),
    )


def _vector_laplacian(w: VectorField2) -> VectorField2:
    return VectorField2(laplacian(w.x), laplacian(w.y))


def _check_pressure_levels(state: StateHistory, params: SolverParams) -> None:
    if params.track_pressure and (state.p_curr is None or state.p_prev is None):
        raise ValueError("pressure recovery is enabled but the history has no pressure levels")


def _rel_change(u_new, b_new, u_old, b_old) -> float:
    """Relative spectral change of the combined (u, B) iterate.

    Non-finite iterates (a diverging fixed point) report an infinite change.
    """
    delta = (l2_norm(u_new - u_old) ** 2 + l2_norm(b_new - b_old) ** 2) ** 0.5
    scale = (l2_norm(u_new) ** 2 + l2_norm(b_new) ** 2) ** 0.5
    rel = delta / scale if scale > 0.0 else delta
    return rel if np.isfinite(rel) else float("inf")


def recover_pressure(
    u_star: VectorField2, b_star: VectorField2, params: SolverParams, f_next: VectorField2
) -> ScalarField:
    """Zero-mean scalar whose gradient is the part removed by the projector.

    Solves lap(P) = div(f - nonlinear momentum terms) spectrally, with the
    converged implicit-solve fields on the right-hand side.
    """
    grid = u_star.grid
    src = divergence(dealias(f_next) - momentum_nonlinear(u_star, b_star, params.s))
    k2 = np.where(grid.k2 == 0.0, 1.0, grid.k2)
    phat = -src.spec / k2
    phat[0, 0] = 0.0
    return ScalarField.from_spectral(grid, phat, dealiased=src.dealiased)


def be_step(
    state: StateHistory,
    params: SolverParams,
    f_next: VectorField2,
    g_next: VectorField2,
) -> tuple[VectorField2, VectorField2, Optional[ScalarField], StepReport]:
    """One backward Euler solve for the provisional fields at t_n + dt.

    Picard iteration: freeze the nonlinear terms at the current iterate,
    Leray-project the right-hand side, and invert the (1/dt - visc*lap)
    operator exactly per mode.  Converges when the relative change of the
    combined (u, B) iterate drops below picard_tol; raises NonConvergence at
    the iteration cap.
    """
    dt = params.dt
    base_u = dealias(f_next) + state.u_curr * (1.0 / dt)
    base_b = dealias(g_next) + state.b_curr * (1.0 / dt)

    u_k, b_k = state.u_curr, state.b_curr
    rel = float("inf")
    for it in range(1, params.picard_max_iters + 1):
        n_u, n_b = nonlinear_pair(u_k, b_k, params.s)
        u_next = _solve_helmholtz(leray_project(base_u - n_u), 1.0 / dt, params.re_inv)
        b_next = _solve_helmholtz(leray_project(base_b - n_b), 1.0 / dt, params.rem_inv)
        rel = _rel_change(u_next, b_next, u_k, b_k)
        u_k, b_k = u_next, b_next
        if rel <= params.picard_tol:
            p_tilde = (
                recover_pressure(u_k, b_k, params, f_next) if params.track_pressure else None
            )
            return u_k, b_k, p_tilde, StepReport(it, rel, dt)
        if rel == float("inf"):
            raise NonConvergence(it, rel, t=state.t_n + dt)
    raise NonConvergence(params.picard_max_iters, rel, t=state.t_n + dt)


def filtered_step(
    state: StateHistory, params: SolverParams, forcing: ForcingFn = zero_forcing
) -> tuple[StateHistory, StepReport]:
    """Backward Euler solve plus the modular filter; rotates the history.

    With filter_enabled false this is the plain backward Euler scheme.
    """
    t_next = state.t_n + params.dt
    _check_pressure_levels(state, params)
    f_next, g_next = forcing(state.grid, t_next)
    u_t, b_t, p_t, report = be_step(state, params, f_next, g_next)

    if params.filter_enabled:
        u_new = apply_filter(u_t, state.u_curr, state.u_prev)
        b_new = apply_filter(b_t, state.b_curr, state.b_prev)
    else:
        u_new, b_new = u_t, b_t

    p_new = p_t
    if params.track_pressure and params.filter_enabled and params.filter_pressure:
        p_new = apply_filter(p_t, state.p_curr, state.p_prev)

    new_state = StateHistory(
        t_n=t_next,
        u_prev=state.u_curr,
        u_curr=u_new,
        b_prev=state.b_curr,
        b_curr=b_new,
        p_prev=state.p_curr if params.track_pressure else None,
        p_curr=p_new,
    )
    return new_state, report


def combined_step(
    state: StateHistory, params: SolverParams, forcing: ForcingFn = zero_forcing
) -> tuple[StateHistory, StepReport]:
    """Solve the equivalent one-step formulation directly for the new levels.

    The time derivative uses the two-step backward difference and every space
    term is evaluated at the interp_F extrapolation of the unknowns, which
    the Picard iteration refreshes each sweep.
    """
    if not params.filter_enabled:
        raise ValueError("the combined formulation is defined only with the filter enabled")
    _check_pressure_levels(state, params)
    dt = params.dt
    t_next = state.t_n + params.dt
    f_next, g_next = forcing(state.grid, t_next)

    def known_part(w_curr, w_prev, visc):
        out = w_curr * (2.0 / dt) - w_prev * (0.5 / dt)
        if visc != 0.0:
            out = out - _vector_laplacian(w_curr) * visc + _vector_laplacian(w_prev) * (0.5 * visc)
        return out

    base_u = dealias(f_next) + known_part(state.u_curr, state.u_prev, params.re_inv)
    base_b = dealias(g_next) + known_part(state.b_curr, state.b_prev, params.rem_inv)
    c0 = 1.5 / dt

    u_k, b_k = state.u_curr, state.b_curr
    rel = float("inf")
    report = None
    for it in range(1, params.picard_max_iters + 1):
        x_k = interp_F(u_k, state.u_curr, state.u_prev)
        y_k = interp_F(b_k, state.b_curr, state.b_prev)
        n_u, n_b = nonlinear_pair(x_k, y_k, params.s)
        u_next = _solve_helmholtz(leray_project(base_u - n_u), c0, 1.5 * params.re_inv)
        b_next = _solve_helmholtz(leray_project(base_b - n_b), c0, 1.5 * params.rem_inv)
        rel = _rel_change(u_next, b_next, u_k, b_k)
        u_k, b_k = u_next, b_next
        if rel <= params.picard_tol:
            report = StepReport(it, rel, dt)
            break
        if rel == float("inf"):
            raise NonConvergence(it, rel, t=t_next)
    if report is None:
        raise NonConvergence(params.picard_max_iters, rel, t=t_next)

    p_new = None
    if params.track_pressure:
        x_c = interp_F(u_k, state.u_curr, state.u_prev)
        y_c = interp_F(b_k, state.b_curr, state.b_prev)
        q = recover_pressure(x_c, y_c, params, f_next)  # recovers interp_F of pressure
        if params.filter_pressure:
            p_new = (q + state.p_curr - state.p_prev * 0.5) * (2.0 / 3.0)
        else:
            p_new = q

    new_state = StateHistory(
        t_n=t_next,
        u_prev=state.u_curr,
        u_curr=u_k,
        b_prev=state.b_curr,
        b_curr=b_k,
        p_prev=state.p_curr if params.track_pressure else None,
        p_curr=p_new,
    )
    return new_state, report


def startup(
    u0: VectorField2,
    b0: VectorField2,
    params: SolverParams,
    exact=None,
    forcing: ForcingFn = zero_forcing,
) -> tuple[StateHistory, StepReport]:
    """Build the two starting levels the two-step history needs.

    With a manufactured solution the levels are exact samples at t = 0 and
    t = dt (projected); otherwise the second level comes from one unfiltered
    backward Euler step.  Either choice carries O(dt^2) startup error, which
    preserves the scheme's global second order.
    """
    grid = u0.grid
    u0p = leray_project(dealias(u0))
    b0p = leray_project(dealias(b0))

    if exact is not None:
        u1 = leray_project(dealias(exact.velocity(grid, params.dt)))
        b1 = leray_project(dealias(exact.magnetic(grid, params.dt)))
        p0 = p1 = None
        if params.track_pressure:
            p0 = _zero_mean(dealias(exact.pressure(grid, 0.0)))
            p1 = _zero_mean(dealias(exact.pressure(grid, params.dt)))
        history = StateHistory(params.dt, u0p, u1, b0p, b1, p0, p1)
        return history, StepReport(0, 0.0, params.dt)

    p0 = None
    if params.track_pressure:
        f0, _ = forcing(grid, 0.0)
        p0 = recover_pressure(u0p, b0p, params, f0)
    seed = StateHistory(0.0, u0p, u0p, b0p, b0p, p0, p0)
    be_params = replace(params, filter_enabled=False)
    return filtered_step(seed, be_params, forcing)


def _zero_mean(f: ScalarField) -> ScalarField:
    coeffs = f.spec.copy()
    coeffs[0, 0] = 0.0
    return ScalarField.from_spectral(f.grid, coeffs, dealiased=f.dealiased)
