"""MHD right-hand sides, solver parameters, manufactured solution, initial data.

The governing system couples a velocity field u and a magnetic field B:

    u_t - re_inv * lap(u) + u.grad(u) - s * B.grad(B) + grad(P) = f
    B_t - rem_inv * lap(B) + u.grad(B) - B.grad(u)              = G
    div(u) = div(B) = 0

with the modified pressure P absorbing the magnetic pressure and G the curl
forcing on the induction equation.  re_inv and rem_inv are inverse Reynolds
numbers (0 encodes the ideal case) and s is the coupling number weighting the
Lorentz force.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tfmhd.grid import (
    Grid,
    ScalarField,
    VectorField2,
    dealias,
    gradient,
    _require_same_grid,
)


@dataclass(frozen=True)
class SolverParams:
    """Physical and numerical parameters of a run.

    ``track_pressure`` switches on pressure recovery (and the extra history
    levels it needs); ``filter_pressure`` controls whether the post-step
    filter is also applied to the recovered pressure.  Neither flag affects
    the velocity or magnetic field trajectory.
    """

    re_inv: float = 0.0
    rem_inv: float = 0.0
    s: float = 1.0
    dt: float = 0.01
    t_end: float = 1.0
    filter_enabled: bool = True
    picard_tol: float = 1e-10
    picard_max_iters: int = 100
    track_pressure: bool = False
    filter_pressure: bool = True

    def __post_init__(self) -> None:
        if self.re_inv < 0.0 or self.rem_inv < 0.0 or self.s < 0.0:
            raise ValueError("re_inv, rem_inv and s must be nonnegative")
        if not self.dt > 0.0:
            raise ValueError(f"time step must be positive, got dt={self.dt}")
        if not self.picard_tol > 0.0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iters < 1:
            raise ValueError("picard_max_iters must be at least 1")


def advect(a: VectorField2, b: VectorField2) -> VectorField2:
    """Advective derivative a.grad(b) with dealiased component products."""
    grid = _require_same_grid(a, b)
    am = dealias(a)
    dbx = gradient(dealias(b).x)
    dby = gradient(dealias(b).y)
    ax, ay = am.x.phys, am.y.phys
    cx = ax * dbx.x.phys + ay * dbx.y.phys
    cy = ax * dby.x.phys + ay * dby.y.phys
    return VectorField2(
        dealias(ScalarField.from_samples(grid, cx)),
        dealias(ScalarField.from_samples(grid, cy)),
    )


def momentum_nonlinear(u: VectorField2, B: VectorField2, s: float) -> VectorField2:
    """Momentum-equation nonlinearity u.grad(u) - s * B.grad(B)."""
    return advect(u, u) - s * advect(B, B)


def induction_nonlinear(u: VectorField2, B: VectorField2) -> VectorField2:
    """Induction-equation nonlinearity u.grad(B) - B.grad(u)."""
    return advect(u, B) - advect(B, u)


def nonlinear_pair(
    u: VectorField2, B: VectorField2, s: float
) -> tuple[VectorField2, VectorField2]:
    """Momentum and induction nonlinearities with shared transforms.

    Matches (momentum_nonlinear, induction_nonlinear) to rounding; the fused
    evaluation reuses the physical-space fields and gradients across the four
    advective products, which dominates the per-step cost.
    """
    grid = _require_same_grid(u, B)
    um, bm = dealias(u), dealias(B)
    dux, duy = gradient(um.x), gradient(um.y)
    dbx, dby = gradient(bm.x), gradient(bm.y)
    uxp, uyp = um.x.phys, um.y.phys
    bxp, byp = bm.x.phys, bm.y.phys

    def adv(apx, apy, d_first, d_second):
        return (
            apx * d_first.x.phys + apy * d_first.y.phys,
            apx * d_second.x.phys + apy * d_second.y.phys,
        )

    uu = adv(uxp, uyp, dux, duy)
    bb = adv(bxp, byp, dbx, dby)
    ub = adv(uxp, uyp, dbx, dby)
    bu = adv(bxp, byp, dux, duy)

    n_u = VectorField2(
        dealias(ScalarField.from_samples(grid, uu[0] - s * bb[0])),
        dealias(ScalarField.from_samples(grid, uu[1] - s * bb[1])),
    )
    n_b = VectorField2(
        dealias(ScalarField.from_samples(grid, ub[0] - bu[0])),
        dealias(ScalarField.from_samples(grid, ub[1] - bu[1])),
    )
    return n_u, n_b


class ManufacturedSolution:
    """Closed-form exact solution with analytically derived forcings.

    The fields are periodic, exactly divergence-free and use distinct
    frequencies for u and B so no term degenerates:

        u(x, y, t) = (1 + t^2) * (sin y, sin x)
        B(x, y, t) = (1 + t^2) * (sin(2y) / 3, 2 sin(2x) / 3)
        P(x, y, t) = 0.1 * (1 + t^2) * sin(x + y)

    The forcings come from substituting these into the governing equations;
    their correctness is enforced by a residual check in the test suite, not
    trusted from the derivation.
    """

    def __init__(self, re_inv: float, rem_inv: float, s: float):
        self.re_inv = float(re_inv)
        self.rem_inv = float(rem_inv)
        self.s = float(s)

    def velocity(self, grid: Grid, t: float) -> VectorField2:
        a = 1.0 + t * t
        return VectorField2.from_samples(grid, a * np.sin(grid.y), a * np.sin(grid.x))

    def magnetic(self, grid: Grid, t: float) -> VectorField2:
        a = 1.0 + t * t
        return VectorField2.from_samples(
            grid, (a / 3.0) * np.sin(2.0 * grid.y), (2.0 * a / 3.0) * np.sin(2.0 * grid.x)
        )

    def pressure(self, grid: Grid, t: float) -> ScalarField:
        a = 1.0 + t * t
        return ScalarField.from_samples(grid, 0.1 * a * np.sin(grid.x + grid.y))

    def velocity_time_derivative(self, grid: Grid, t: float) -> VectorField2:
        return VectorField2.from_samples(grid, 2.0 * t * np.sin(grid.y), 2.0 * t * np.sin(grid.x))

    def magnetic_time_derivative(self, grid: Grid, t: float) -> VectorField2:
        return VectorField2.from_samples(
            grid, (2.0 * t / 3.0) * np.sin(2.0 * grid.y), (4.0 * t / 3.0) * np.sin(2.0 * grid.x)
        )

    def velocity_forcing(self, grid: Grid, t: float) -> VectorField2:
        a = 1.0 + t * t
        x, y = grid.x, grid.y
        sx, sy = np.sin(x), np.sin(y)
        press = 0.1 * a * np.cos(x + y)
        fx = (
            2.0 * t * sy
            + self.re_inv * a * sy
            + a * a * sx * np.cos(y)
            - self.s * (4.0 * a * a / 9.0) * np.sin(2.0 * x) * np.cos(2.0 * y)
            + press
        )
        fy = (
            2.0 * t * sx
            + self.re_inv * a * sx
            + a * a * sy * np.cos(x)
            - self.s * (4.0 * a * a / 9.0) * np.sin(2.0 * y) * np.cos(2.0 * x)
            + press
        )
        return VectorField2.from_samples(grid, fx, fy)

    def magnetic_forcing(self, grid: Grid, t: float) -> VectorField2:
        a = 1.0 + t * t
        x, y = grid.x, grid.y
        gx = (
            (2.0 * t / 3.0) * np.sin(2.0 * y)
            + self.rem_inv * (4.0 * a / 3.0) * np.sin(2.0 * y)
            + (2.0 * a * a / 3.0) * np.sin(x) * np.cos(2.0 * y)
            - (2.0 * a * a / 3.0) * np.sin(2.0 * x) * np.cos(y)
        )
        gy = (
            (4.0 * t / 3.0) * np.sin(2.0 * x)
            + self.rem_inv * (8.0 * a / 3.0) * np.sin(2.0 * x)
            + (4.0 * a * a / 3.0) * np.sin(y) * np.cos(2.0 * x)
            - (a * a / 3.0) * np.sin(2.0 * y) * np.cos(x)
        )
        return VectorField2.from_samples(grid, gx, gy)


def default_manufactured_solution(params: SolverParams) -> ManufacturedSolution:
    return ManufacturedSolution(params.re_inv, params.rem_inv, params.s)


def forcing_at(
    ms: ManufacturedSolution, grid: Grid, t: float
) -> tuple[VectorField2, VectorField2]:
    """Sample the stored closed-form forcings onto the grid at time t."""
    if t < 0.0:
        raise ValueError(f"forcing requested at negative time t={t}")
    return ms.velocity_forcing(grid, t), ms.magnetic_forcing(grid, t)


def zero_forcing(grid: Grid, t: float = 0.0) -> tuple[VectorField2, VectorField2]:
    """Unforced configuration: both forcings vanish identically."""
    return VectorField2.zeros(grid), VectorField2.zeros(grid)


def orszag_tang_initial(grid: Grid) -> tuple[VectorField2, VectorField2]:
    """Smooth vortex initial data for the ideal conservation benchmark."""
    u0 = VectorField2.from_samples(grid, -np.sin(grid.y + 2.0), np.sin(grid.x + 1.4))
    b0 = VectorField2.from_samples(
        grid,
        -(1.0 / 3.0) * np.sin(grid.y + 6.2),
        (2.0 / 3.0) * np.sin(2.0 * grid.x + 2.3),
    )
    return u0, b0
