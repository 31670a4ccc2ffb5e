import dataclasses

import numpy as np
import pytest

from fluxstep import (
    GAMMA,
    LossForm,
    LossKind,
    ModelSpec,
    StateField,
    Stencil,
    UsageError,
    boundary_value,
    differential_loss,
    evaluate_loss,
    flux,
    integral_cell_residual,
    integral_loss,
    make_grid,
    sod_model,
    trapezoid_space,
    trapezoid_time,
    wave_model,
    with_zero_flux,
)
from fluxstep.models import BoundaryKind, ModelKind, Side

EPS = np.finfo(float).eps


def constant_euler_model(rho=8.0, u=0.0, p=8.0):
    """Euler model with spatially constant initial (and hence boundary) data."""
    E = 0.5 * rho * u * u + p / (GAMMA - 1.0)
    return ModelSpec(
        kind=ModelKind.EULER_1D,
        n_components=3,
        initial_condition=(lambda x: rho, lambda x: rho * u, lambda x: E),
        boundary_kind=BoundaryKind.DIRICHLET_BOTH,
    )


def smooth_euler_state(grid, rng=None, bump=0.0):
    x = grid.x
    rho = 2.0 + 0.5 * np.sin(2 * np.pi * x)
    u = 0.3 * np.cos(np.pi * x)
    p = 2.0 + 0.4 * np.cos(2 * np.pi * x) + bump
    return np.stack([rho, rho * u, 0.5 * rho * u**2 + p / (GAMMA - 1.0)])


def scalar_integral_residual(model, u, v, k, dx, dt):
    """Independent loop-based evaluation of the per-cell integral residual."""
    m = u.shape[0]
    out = np.zeros(m)
    Fu_k = flux(model, u[:, k])
    Fu_k1 = flux(model, u[:, k + 1])
    Fv_k = flux(model, v[:, k])
    Fv_k1 = flux(model, v[:, k + 1])
    for c in range(m):
        mass_new = 0.5 * (v[c, k] + v[c, k + 1]) * dx
        mass_old = 0.5 * (u[c, k] + u[c, k + 1]) * dx
        out[c] = (
            mass_new
            - mass_old
            - 0.5 * (Fu_k[c] + Fv_k[c]) * dt
            + 0.5 * (Fu_k1[c] + Fv_k1[c]) * dt
        )
    return out


class TestTrapezoidRules:
    def test_time_constant(self):
        assert trapezoid_time(3.0, 3.0, 0.25) == 0.75

    def test_time_simple(self):
        assert trapezoid_time(0.0, 2.0, 0.01) == pytest.approx(0.01)

    def test_time_exact_on_linear(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b, tk, dt = rng.uniform(-2, 2, 4)
            dt = abs(dt) + 0.01
            got = trapezoid_time(a + b * tk, a + b * (tk + dt), dt)
            want = a * dt + b * (tk * dt + dt * dt / 2)
            assert abs(got - want) <= 4 * EPS * max(abs(want), 1.0)

    def test_space_constant(self):
        g = np.full(7, 2.5)
        assert trapezoid_space(g, 0, 6, 0.1) == pytest.approx(2.5 * 6 * 0.1)

    def test_space_hand_value(self):
        assert trapezoid_space(np.array([0.0, 1.0, 2.0]), 0, 2, 0.5) == 1.0

    def test_single_interval_matches_time_rule(self):
        g = np.array([0.7, 1.9])
        assert trapezoid_space(g, 0, 1, 0.03) == trapezoid_time(0.7, 1.9, 0.03)

    def test_index_order_enforced(self):
        with pytest.raises(UsageError):
            trapezoid_space(np.zeros(5), 3, 3, 0.1)
        with pytest.raises(UsageError):
            trapezoid_space(np.zeros(5), 0, 5, 0.1)


class TestDifferentialLoss:
    def test_zero_flux_fixed_point_is_global_minimum(self):
        model = with_zero_flux(sod_model())
        grid = make_grid(0, 1, 101)
        from fluxstep import initial_state

        u_n = initial_state(model, grid)
        lv = differential_loss(model, grid, u_n, u_n.values.copy(), dt=0.01)
        assert lv.total == 0.0
        assert np.all(lv.grad_wrt_prediction == 0.0)

    def test_constant_state_has_zero_interior(self):
        model = wave_model()
        grid = make_grid(0, 1, 11)
        c = 0.37
        u_n = StateField(grid, np.full((1, 11), c), time=0.2)
        lv = differential_loss(model, grid, u_n, np.full((1, 11), c), dt=0.01)
        assert lv.interior == 0.0

    def test_hand_evaluated_single_point(self):
        # residual at the middle node: 0.01/0.01 + (-0.01 - 0)/0.5 = 0.98,
        # squared and weighted by dx: 0.98^2 * 0.5 = 0.4802; at time 2.0 both
        # wave boundary values are 0, so the penalty vanishes
        model = wave_model()
        grid = make_grid(0, 1, 3)
        u_n = StateField(grid, np.zeros((1, 3)), time=2.0)
        pred = np.array([[0.0, 0.01, 0.0]])
        lv = differential_loss(model, grid, u_n, pred, dt=0.01)
        assert lv.interior == pytest.approx(0.4802, rel=1e-12)
        assert lv.boundary == 0.0
        assert lv.total == pytest.approx(0.4802, rel=1e-12)

    def test_total_is_interior_plus_boundary(self):
        model = wave_model()
        grid = make_grid(0, 1, 21)
        rng = np.random.default_rng(1)
        u_n = StateField(grid, rng.uniform(0, 1, (1, 21)), time=0.1)
        lv = differential_loss(model, grid, u_n, rng.uniform(0, 1, (1, 21)), dt=0.01)
        assert lv.total == lv.interior + lv.boundary
        assert lv.total >= 0.0


class TestIntegralCellResidual:
    def test_constant_matching_states_cancel(self):
        model = wave_model()
        grid = make_grid(0, 1, 5)
        u_n = StateField(grid, np.full((1, 5), 1.3), time=0.0)
        lk = integral_cell_residual(model, u_n, u_n.values.copy(), 1, grid.dx, 0.02)
        np.testing.assert_array_equal(lk, [0.0])

    def test_hand_evaluated_wave_cell(self):
        # mass terms cancel; flux terms: -0.5*(-1-1)*0.01 + 0.5*(-2-2)*0.01 = -0.01
        model = wave_model()
        grid = make_grid(0, 1, 3)
        vals = np.array([[1.0, 2.0, 0.0]])
        u_n = StateField(grid, vals, time=0.0)
        lk = integral_cell_residual(model, u_n, vals.copy(), 0, dx=0.77, dt=0.01)
        assert lk[0] == pytest.approx(-0.01, rel=1e-14)

    def test_uniform_sod_left_state_is_exact_zero(self):
        model = sod_model()
        grid = make_grid(0, 1, 3)
        vals = np.array([[8.0, 8, 8], [0, 0, 0], [8, 8, 8.0]])
        u_n = StateField(grid, vals, time=0.0)
        lk = integral_cell_residual(model, u_n, vals.copy(), 0, 0.01, 0.01)
        np.testing.assert_array_equal(lk, [0.0, 0.0, 0.0])

    def test_matches_scalar_oracle_on_random_states(self):
        rng = np.random.default_rng(2)
        model = sod_model()
        grid = make_grid(0, 1, 9)
        for _ in range(30):
            u = smooth_euler_state(grid) * rng.uniform(0.9, 1.1, (3, 9))
            v = u * rng.uniform(0.95, 1.05, (3, 9))
            u_n = StateField(grid, u, time=0.0)
            k = int(rng.integers(0, 8))
            got = integral_cell_residual(model, u_n, v, k, grid.dx, 0.004)
            want = scalar_integral_residual(model, u, v, k, grid.dx, 0.004)
            np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-16)

    def test_cell_index_bounds(self):
        model = wave_model()
        grid = make_grid(0, 1, 4)
        u_n = StateField(grid, np.zeros((1, 4)), time=0.0)
        with pytest.raises(UsageError):
            integral_cell_residual(model, u_n, u_n.values, 3, grid.dx, 0.01)


class TestIntegralLoss:
    def test_steady_constant_state_with_matching_boundaries(self):
        model = constant_euler_model()
        grid = make_grid(0, 1, 21)
        from fluxstep import initial_state

        u_n = initial_state(model, grid)
        lv = integral_loss(model, grid, u_n, u_n.values.copy(), dt=0.005)
        assert lv.total == 0.0

    def test_single_point_perturbation_is_quadratic(self):
        model = constant_euler_model()
        grid = make_grid(0, 1, 21)
        from fluxstep import initial_state

        u_n = initial_state(model, grid)
        totals = []
        for eps_val in (1e-3, 1e-4):
            pred = u_n.values.copy()
            pred[0, 10] += eps_val
            lv = integral_loss(model, grid, u_n, pred, dt=0.005)
            totals.append(lv.total)
            assert lv.grad_wrt_prediction[0, 10] != 0.0
        # O(eps^2): shrinking eps by 10 shrinks the loss by ~100
        assert totals[1] == pytest.approx(totals[0] / 100.0, rel=1e-3)

    def test_sod_jump_localizes_to_adjacent_cell(self):
        model = sod_model()
        grid = make_grid(0, 1, 101)
        from fluxstep import initial_state

        u_n = initial_state(model, grid)
        v = u_n.values.copy()
        oracle = np.array(
            [
                scalar_integral_residual(model, u_n.values, v, k, grid.dx, 0.0025)
                for k in range(100)
            ]
        )
        # the only cells that can contribute are those touching the jump node,
        # and of these only the mixed-state cell [x_49, x_50] is nonzero
        nonzero = np.nonzero(np.abs(oracle).sum(axis=1))[0]
        np.testing.assert_array_equal(nonzero, [49])
        lv = integral_loss(model, grid, u_n, v, dt=0.0025)
        assert lv.interior == pytest.approx(float(np.sum(oracle**2)), rel=1e-13)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        grid = make_grid(0, 1, 9)
        cases = [
            (wave_model(), lambda: rng.uniform(0.1, 1.0, (1, 9))),
            (sod_model(), lambda: smooth_euler_state(grid) * rng.uniform(0.95, 1.05, (3, 9))),
        ]
        for form in (
            LossForm(LossKind.INTEGRAL),
            LossForm(LossKind.DIFFERENTIAL, Stencil.BACKWARD),
            LossForm(LossKind.DIFFERENTIAL, Stencil.FORWARD),
        ):
            for model, gen in cases:
                base = gen()
                u_n = StateField(grid, base, time=0.1)
                pred = base * rng.uniform(0.97, 1.03, base.shape)
                lv = evaluate_loss(form, model, grid, u_n, pred, 0.01)

                def total(v):
                    return evaluate_loss(form, model, grid, u_n, v, 0.01).total

                h = 1e-6
                num = np.zeros_like(pred)
                for i in range(pred.shape[0]):
                    for j in range(pred.shape[1]):
                        vp = pred.copy()
                        vp[i, j] += h
                        vm = pred.copy()
                        vm[i, j] -= h
                        num[i, j] = (total(vp) - total(vm)) / (2 * h)
                rel = np.linalg.norm(lv.grad_wrt_prediction - num) / np.linalg.norm(num)
                assert rel <= 1e-5


class TestTelescopingIdentity:
    def test_cell_residual_sum_telescopes(self):
        # summing the per-cell residuals cancels every interior flux, leaving
        # the global mass change minus the boundary flux integrals; each cell
        # contributes its own round-off, so the check runs on a handful of
        # cells with exactly accumulated sums on both sides
        import math

        rng = np.random.default_rng(4)
        model = sod_model()
        n = 9
        grid = make_grid(0, 1, n)
        dx, dt = grid.dx, 0.004
        from fluxstep.losses import _integral_residuals
        from fluxstep.models import flux_values

        for _ in range(150):
            u = smooth_euler_state(grid) * rng.uniform(0.8, 1.2, (3, n))
            v = u * rng.uniform(0.9, 1.1, (3, n))
            L, _ = _integral_residuals(model, u, v, dx, dt)
            lhs = np.array([math.fsum(L[c]) for c in range(3)])
            Fu = flux_values(model, u)
            Fv = flux_values(model, v)
            mass_terms = np.array(
                [
                    trapezoid_space(v[c], 0, n - 1, dx)
                    - trapezoid_space(u[c], 0, n - 1, dx)
                    for c in range(3)
                ]
            )
            flux_terms = 0.5 * dt * ((Fu[:, -1] + Fv[:, -1]) - (Fu[:, 0] + Fv[:, 0]))
            rhs = mass_terms + flux_terms
            largest_term = max(
                float(np.max(np.abs(0.5 * dx * (v[:, :-1] + v[:, 1:])))),
                float(np.max(np.abs(0.5 * dx * (u[:, :-1] + u[:, 1:])))),
                float(np.max(np.abs(0.5 * dt * (Fu + Fv)))),
            )
            assert np.max(np.abs(lhs - rhs)) <= 16 * EPS * largest_term


class TestFormAgreement:
    def test_forms_agree_to_first_order_on_smooth_states(self):
        # both interiors estimate the integrated squared residual of the same
        # smooth non-solution pair; their difference shrinks ~first order as
        # dx and dt are halved together (the integral interior carries a
        # dx*dt^2 quadrature scale relative to the differential one)
        model = wave_model()
        diffs = []
        for n, dt in ((51, 0.02), (101, 0.01), (201, 0.005)):
            grid = make_grid(0, 1, n)
            x = grid.x
            u = (np.sin(2 * np.pi * x) + 2.0)[np.newaxis, :]
            v = u + dt * np.cos(3 * np.pi * x)[np.newaxis, :]
            u_n = StateField(grid, u, time=2.0)
            d = differential_loss(model, grid, u_n, v, dt, dx_weighted=True)
            i = integral_loss(model, grid, u_n, v, dt, dx_weighted=False)
            scaled_integral = i.interior / (grid.dx * dt * dt)
            diffs.append(abs(d.interior - scaled_integral))
        assert diffs[0] / diffs[1] >= 1.8
        assert diffs[1] / diffs[2] >= 1.8


class TestBoundaryPenalty:
    def test_penalty_evaluated_at_next_time_level(self):
        model = wave_model()
        grid = make_grid(0, 1, 5)
        u_n = StateField(grid, np.zeros((1, 5)), time=0.24)
        pred = np.zeros((1, 5))
        lv = integral_loss(model, grid, u_n, pred, dt=0.01)
        want = float(boundary_value(model, Side.RIGHT, 0.25)[0]) ** 2
        assert lv.boundary == pytest.approx(want, rel=1e-12)

    def test_boundary_weight_scales_penalty(self):
        model = wave_model()
        grid = make_grid(0, 1, 5)
        u_n = StateField(grid, np.zeros((1, 5)), time=0.24)
        base = integral_loss(model, grid, u_n, np.zeros((1, 5)), dt=0.01)
        heavy = integral_loss(
            model, grid, u_n, np.zeros((1, 5)), dt=0.01, boundary_weight=10.0
        )
        assert heavy.boundary == pytest.approx(10 * base.boundary, rel=1e-12)

    def test_outflow_left_penalizes_right_end_only(self):
        model = dataclasses.replace(
            wave_model(), boundary_kind=BoundaryKind.DIRICHLET_RIGHT_OUTFLOW_LEFT
        )
        grid = make_grid(0, 1, 5)
        u_n = StateField(grid, np.zeros((1, 5)), time=2.0)
        pred = np.zeros((1, 5))
        pred[0, 0] = 7.0  # left endpoint unpenalized under outflow
        lv = integral_loss(model, grid, u_n, pred, dt=0.01)
        assert lv.boundary == 0.0
