"""Observables and conservation-identity residuals."""

import numpy as np
import pytest

from tfmhd.diagnostics import (
    CSV_COLUMNS,
    cross_helicity,
    energy,
    energy_identity_residual,
    f_norm_sq,
    g_bounds_check,
    g_identity_residual,
    g_pair_mixed,
    g_pair_mixed_identity_residual,
    g_pair_norm_sq,
    helicity_identity_residual,
    initial_record,
    record,
)
from tfmhd.grid import VectorField2, inner_product, l2_norm
from tfmhd.mhd import SolverParams, orszag_tang_initial, zero_forcing
from tfmhd.stepper import filtered_step, startup

from conftest import random_vector

PI = np.pi


class TestEnergyAndHelicity:
    def test_energy_of_single_shear_mode(self, grid32):
        u = VectorField2.from_samples(grid32, np.sin(grid32.y), 0 * grid32.x)
        b = VectorField2.zeros(grid32)
        for s in (0.0, 1.0, 3.7):
            assert energy(u, b, s) == pytest.approx(PI**2, rel=1e-13)

    def test_energy_of_vortex_data(self, grid32):
        u0, b0 = orszag_tang_initial(grid32)
        # (1/2)(4 pi^2 + 10 pi^2 / 9) by per-mode quadrature
        assert energy(u0, b0, 1.0) == pytest.approx(23 * PI**2 / 9, rel=1e-13)

    def test_energy_reduces_to_magnetic_part(self, grid16, rng):
        b = random_vector(rng, grid16)
        z = VectorField2.zeros(grid16)
        assert energy(z, b, 2.0) == pytest.approx(l2_norm(b) ** 2, rel=1e-12)

    def test_helicity_of_aligned_fields(self, grid32):
        u = VectorField2.from_samples(grid32, np.sin(grid32.y), 0 * grid32.x)
        assert cross_helicity(u, u) == pytest.approx(PI**2, rel=1e-13)

    def test_helicity_of_vortex_data(self, grid32):
        u0, b0 = orszag_tang_initial(grid32)
        # only the x-components share a frequency: (1/2)(1/3) 2 pi^2 cos(4.2)
        assert cross_helicity(u0, b0) == pytest.approx((PI**2 / 3) * np.cos(4.2), rel=1e-12)

    def test_helicity_of_pointwise_orthogonal_fields(self, grid16):
        u = VectorField2.from_samples(grid16, np.sin(grid16.y), 0 * grid16.x)
        b = VectorField2.from_samples(grid16, 0 * grid16.x, np.sin(grid16.x))
        assert abs(cross_helicity(u, b)) <= 1e-13


class TestPairAndDampingForms:
    def test_pair_form_against_zero_levels(self, grid16, rng):
        w = random_vector(rng, grid16)
        z = VectorField2.zeros(grid16)
        nn = inner_product(w, w)
        assert g_pair_norm_sq(w, z) == pytest.approx(1.5 * nn, rel=1e-13)
        assert g_pair_norm_sq(z, w) == pytest.approx(0.5 * nn, rel=1e-13)
        assert g_pair_norm_sq(w, w) == pytest.approx(0.5 * nn, rel=1e-13)

    def test_pair_form_dips_below_plain_energy(self, grid16):
        # the form is indefinite-looking but its matrix is positive definite
        # (eigenvalues 1 +/- sqrt(13)/4); it can sink far below the new
        # level's energy, down to the lower sandwich bound
        w = VectorField2.from_samples(grid16, np.sin(grid16.x), 0 * grid16.x)
        nn = inner_product(w, w)
        assert g_pair_norm_sq(0.5 * w, w) < 0.5 * nn
        assert g_pair_norm_sq(0.5 * w, w) > 0.0

    def test_damping_form(self, grid16, rng):
        w = random_vector(rng, grid16)
        z = VectorField2.zeros(grid16)
        assert f_norm_sq(z) == 0.0
        assert f_norm_sq(w) == pytest.approx(3.0 * l2_norm(w) ** 2, rel=1e-13)
        assert f_norm_sq(2.0 * w) == pytest.approx(4.0 * f_norm_sq(w), rel=1e-13)

    def test_mixed_pair_symmetric_in_field_swap(self, grid16, rng):
        u2, u1 = random_vector(rng, grid16), random_vector(rng, grid16)
        b2, b1 = random_vector(rng, grid16), random_vector(rng, grid16)
        lhs = g_pair_mixed(u2, u1, b2, b1)
        rhs = g_pair_mixed(b2, b1, u2, u1)
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestStencilPairIdentity:
    def test_scalar_example(self, grid16):
        one = VectorField2.from_samples(grid16, np.ones(grid16.shape), 0 * grid16.x)
        z = VectorField2.zeros(grid16)
        # triple (1, 0, 0), dt = 1: both sides equal (3/2)^2 per unit area,
        # split as pair increment 3/2 plus damping (1/4) * 3
        from tfmhd.stepper import bdf2_stencil, interp_F
        from tfmhd.diagnostics import f_norm_sq
        from tfmhd.grid import inner_product

        area = grid16.area
        lhs = inner_product(bdf2_stencil(one, z, z), interp_F(one, z, z))
        assert lhs == pytest.approx(2.25 * area, rel=1e-13)
        assert g_pair_norm_sq(one, z) == pytest.approx(1.5 * area, rel=1e-13)
        assert 0.25 * f_norm_sq(one) == pytest.approx(0.75 * area, rel=1e-13)
        assert g_identity_residual(one, z, z, dt=1.0) <= 1e-13

    def test_constant_triple_balances_to_rounding(self, grid16, rng):
        c = random_vector(rng, grid16)
        assert g_identity_residual(c, c, c, dt=0.3) <= 1e-15

    def test_random_triples(self, grid16, rng):
        for _ in range(200):
            triple = [random_vector(rng, grid16) for _ in range(3)]
            dt = float(rng.uniform(0.01, 1.0))
            assert g_identity_residual(*triple, dt=dt) <= 1e-11

    def test_mixed_version_on_random_triples(self, grid16, rng):
        for _ in range(200):
            u_triple = tuple(random_vector(rng, grid16) for _ in range(3))
            b_triple = tuple(random_vector(rng, grid16) for _ in range(3))
            dt = float(rng.uniform(0.01, 1.0))
            assert g_pair_mixed_identity_residual(u_triple, b_triple, dt) <= 1e-11


class TestPairBounds:
    def test_aligned_pair_sits_on_lower_bound(self, grid16, rng):
        w = random_vector(rng, grid16)
        nn = inner_product(w, w)
        g = g_pair_norm_sq(w, w)
        assert abs(g - (0.75 * nn - 0.25 * nn)) <= 1e-13 * nn

    def test_zero_new_level_case(self, grid16, rng):
        w = random_vector(rng, grid16)
        lo, hi = g_bounds_check(VectorField2.zeros(grid16), w)
        assert lo and hi

    def test_thousand_random_pairs(self, grid16, rng):
        for _ in range(1000):
            lo, hi = g_bounds_check(random_vector(rng, grid16), random_vector(rng, grid16))
            assert lo and hi

    def test_anti_aligned_pair_sits_on_upper_bound(self, grid16, rng):
        w = random_vector(rng, grid16)
        nn = inner_product(w, w)
        g = g_pair_norm_sq(w, -1.0 * w)
        assert abs(g - (2.25 * nn + 1.25 * nn)) <= 1e-13 * nn


def _ot_triple(grid, params, n_steps=3):
    """March a few steps and return the last triple plus the new history."""
    u0, b0 = orszag_tang_initial(grid)
    state, _ = startup(u0, b0, params)
    prev = state
    for _ in range(n_steps):
        prev = state
        state, _ = filtered_step(state, params)
    u_triple = (state.u_curr, state.u_prev, prev.u_prev)
    b_triple = (state.b_curr, state.b_prev, prev.b_prev)
    return u_triple, b_triple, state, prev


class TestSchemeIdentityResiduals:
    def test_zero_state_reports_zero(self, grid16):
        params = SolverParams()
        z = VectorField2.zeros(grid16)
        triple = (z, z, z)
        assert energy_identity_residual(triple, triple, params, z, z) == 0.0
        assert helicity_identity_residual(triple, triple, params, z, z) == 0.0

    def test_ideal_single_step_residuals(self, grid32):
        params = SolverParams(re_inv=0.0, rem_inv=0.0, s=1.0, dt=0.01, picard_tol=1e-13)
        u_triple, b_triple, *_ = _ot_triple(grid32, params)
        f, g = zero_forcing(grid32)
        assert energy_identity_residual(u_triple, b_triple, params, f, g) <= 1e-8
        assert helicity_identity_residual(u_triple, b_triple, params, f, g) <= 1e-8

    def test_dissipative_single_step_residuals(self, grid32):
        params = SolverParams(re_inv=0.01, rem_inv=0.02, s=1.0, dt=0.01, picard_tol=1e-13)
        u_triple, b_triple, *_ = _ot_triple(grid32, params)
        f, g = zero_forcing(grid32)
        assert energy_identity_residual(u_triple, b_triple, params, f, g) <= 1e-8
        assert helicity_identity_residual(u_triple, b_triple, params, f, g) <= 1e-8

    def test_unfiltered_steps_report_nonzero_residual(self, grid32):
        params = SolverParams(
            re_inv=0.0, rem_inv=0.0, s=1.0, dt=0.01, picard_tol=1e-13, filter_enabled=False
        )
        u_triple, b_triple, *_ = _ot_triple(grid32, params)
        f, g = zero_forcing(grid32)
        # the balance is an identity of the filtered scheme only
        assert energy_identity_residual(u_triple, b_triple, params, f, g) > 1e-6

    def test_helicity_identity_symmetric_under_swap(self, grid32):
        params = SolverParams(re_inv=0.0, rem_inv=0.0, s=1.0, dt=0.01, picard_tol=1e-13)
        u_triple, b_triple, *_ = _ot_triple(grid32, params)
        f, g = zero_forcing(grid32)
        a = helicity_identity_residual(u_triple, b_triple, params, f, g)
        b = helicity_identity_residual(b_triple, u_triple, params, g, f)
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


class TestRecords:
    def test_initial_record_of_zero_state(self, grid16):
        z = VectorField2.zeros(grid16)
        rec = initial_record(z, z, SolverParams())
        assert rec.energy == 0.0
        assert rec.cross_helicity == 0.0
        assert rec.div_u == 0.0

    def test_record_bookkeeping_and_invariants(self, grid16):
        params = SolverParams(dt=0.02, picard_tol=1e-12)
        u0, b0 = orszag_tang_initial(grid16)
        state, rep = startup(u0, b0, params)
        rec1 = record(1, state, params, zero_forcing(grid16), rep)
        assert rec1.step == 1
        assert rec1.t == pytest.approx(0.02)
        assert rec1.picard_iters == rep.picard_iters
        assert rec1.f_damp_u == 0.0  # no triple yet
        prev = state
        state, rep2 = filtered_step(state, params)
        rec2 = record(2, state, params, zero_forcing(grid16), rep2, prev_state=prev)
        assert rec2.f_damp_u > 0.0
        assert rec2.div_u <= 1e-10 and rec2.div_b <= 1e-10
        assert rec2.g_energy_u == pytest.approx(
            g_pair_norm_sq(state.u_curr, state.u_prev), rel=1e-12
        )
        assert len(rec2.csv_values()) == len(CSV_COLUMNS)
