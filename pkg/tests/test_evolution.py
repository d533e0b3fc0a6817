import numpy as np
import pytest

from gllflow.errors import DomainError, GridError, InstabilityError
from gllflow.evolution import (EvolveConfig, RadialField, energy_history,
                               evolve, field_from_profile, great_circle_bump,
                               great_circle_deviation, make_grid, residual,
                               selfsim_consistency)
from gllflow.geometry import E3, FlowParams, TangentVec, harmonic_map_jet, stereo_lift_arr
from gllflow.selfsim import solve_profile

HEAT = FlowParams(2, 1.0, 0.0)
SCHRODINGER = FlowParams(2, 0.0, 1.0)


def _harmonic_field(r, v=(1.0, 0.0)):
    u, _, _ = harmonic_map_jet(TangentVec(v[0], v[1], 0.0), r)
    return RadialField(r, u)


def _evolve_stereo(f0, r, params, T, dt_factor=0.1, store_every=10**9):
    """Independent chart-coordinate evolution (dual-chart oracle)."""
    h = r[1] - r[0]
    dt = dt_factor * h**2
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    dt = T / n_steps
    n = params.n
    mult = params.alpha + 1j * params.beta
    f = f0.astype(complex).copy()

    def rhs(f):
        out = np.zeros_like(f)
        fr = (f[2:] - f[:-2]) / (2 * h)
        frr = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        rr = r[1:-1]
        fi = f[1:-1]
        d = 1.0 + np.abs(fi) ** 2
        out[1:-1] = mult * (frr - 2 * np.conj(fi) * fr**2 / d + (2 * n - 1) / rr * fr
                            - (2 * n - 1) / rr**2 * fi + 2 * np.abs(fi) ** 2 * fi / (rr**2 * d))
        return out

    for _ in range(n_steps):
        k1 = rhs(f)
        k2 = rhs(f + dt / 2 * k1)
        k3 = rhs(f + dt / 2 * k2)
        k4 = rhs(f + dt * k3)
        f = f + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        f[0] = 0.0
        f[-1] = f0[-1]
    return f


class TestConfigAndTypes:
    def test_grid(self):
        r = make_grid(10.0, 11)
        assert r[0] == 0.0 and r[-1] == 10.0
        g = make_grid(10.0, 11, grading=2.0)
        assert np.all(np.diff(np.diff(g)) > 0)
        with pytest.raises(GridError):
            make_grid(10.0, 3)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            EvolveConfig(dt_factor=0.3)
        with pytest.raises(DomainError):
            EvolveConfig(outer_boundary="periodic")
        with pytest.raises(DomainError):
            EvolveConfig(scheme="euler")

    def test_field_pins_origin(self):
        r = make_grid(5.0, 21)
        u = np.tile(E3, (21, 1))
        f = RadialField(r, u)
        assert np.array_equal(f.u[0], E3)

    def test_field_rejects_bad_norms(self):
        r = make_grid(5.0, 21)
        u = np.tile(E3 * 1.01, (21, 1))
        with pytest.raises(DomainError):
            RadialField(r, u)


class TestEvolve:
    def test_constant_north_pole(self):
        r = make_grid(8.0, 41)
        f0 = RadialField(r, np.tile(E3, (41, 1)))
        traj = evolve(f0, SCHRODINGER, 0.05, EvolveConfig(store_every=5))
        for fr in traj.frames:
            assert np.array_equal(fr.u, f0.u)
        rep = residual(traj)
        assert rep.max_l2 == 0.0

    @pytest.mark.parametrize("params", [HEAT, SCHRODINGER])
    def test_harmonic_stationarity_second_order(self, params):
        drifts = []
        for N in (51, 101):
            r = make_grid(15.0, N)
            f0 = _harmonic_field(r)
            traj = evolve(f0, params, 0.2, EvolveConfig(store_every=10**9))
            drifts.append(float(np.max(np.linalg.norm(traj.frames[-1].u - f0.u, axis=1))))
        assert drifts[1] <= drifts[0] / 3.0     # ~ dr^2
        dr2 = (15.0 / 100) ** 2
        assert drifts[1] <= 2.0 * dr2           # modest constant

    def test_origin_pinned_and_drift_bounded(self):
        r = make_grid(10.0, 81)
        traj = evolve(great_circle_bump(r, 0.5, 3.0, 1.0), HEAT, 0.05,
                      EvolveConfig(store_every=20))
        assert all(np.array_equal(fr.u[0], E3) for fr in traj.frames)
        assert traj.max_norm_drift <= 1e-6

    def test_instability_aborts_with_diagnostics(self):
        r = make_grid(6.0, 61)
        f0 = great_circle_bump(r, 1.2, 2.0, 0.6)
        with pytest.raises(InstabilityError) as exc:
            evolve(f0, FlowParams(4, 0.0, 1.0), 1.0,
                   EvolveConfig(dt_factor=0.25, store_every=100))
        assert "drift" in exc.value.diagnostics

    def test_outer_boundary_policies_differ(self):
        r = make_grid(6.0, 61)
        f0 = great_circle_bump(r, 0.5, 4.5, 1.0)   # bump near the boundary
        t_clamp = evolve(f0, HEAT, 0.05, EvolveConfig(outer_boundary="clamp",
                                                      store_every=10**9))
        t_neu = evolve(f0, HEAT, 0.05, EvolveConfig(outer_boundary="neumann",
                                                    store_every=10**9))
        diff = np.max(np.linalg.norm(t_clamp.frames[-1].u - t_neu.frames[-1].u, axis=1))
        assert diff > 1e-6   # the policies are genuinely different
        assert np.array_equal(t_clamp.frames[-1].u[-1], f0.u[-1])


class TestResidual:
    def test_needs_three_frames(self):
        r = make_grid(8.0, 41)
        traj = evolve(RadialField(r, np.tile(E3, (41, 1))), HEAT, 0.01,
                      EvolveConfig(store_every=10**9))
        with pytest.raises(DomainError):
            residual(traj)

    def test_second_order_self_convergence(self):
        l2s = []
        for N in (81, 161, 321):
            r = make_grid(10.0, N)
            traj = evolve(great_circle_bump(r, 0.5, 3.0, 1.0), HEAT, 0.02,
                          EvolveConfig(store_every=4))
            l2s.append(residual(traj).max_l2)
        orders = [np.log2(a / b) for a, b in zip(l2s[:-1], l2s[1:])]
        assert min(orders) >= 1.8

    def test_dual_chart_oracle(self):
        # evolve the same data in chart coordinates and compare after lift
        diffs = []
        for N in (81, 161):
            r = make_grid(8.0, N)
            f0 = 0.3 * r * np.exp(-((r - 2.5) / 1.2) ** 2)
            field0 = RadialField(r, stereo_lift_arr(f0.astype(complex)))
            traj = evolve(field0, HEAT, 0.05, EvolveConfig(store_every=10**9))
            f_chart = _evolve_stereo(f0, r, HEAT, 0.05)
            u_chart = stereo_lift_arr(f_chart)
            diffs.append(float(np.max(np.linalg.norm(traj.frames[-1].u - u_chart, axis=1))))
        assert diffs[0] <= 5e-3
        assert diffs[1] <= diffs[0] / 2.5


class TestGreatCircle:
    def test_trivial(self):
        r = make_grid(8.0, 41)
        traj = evolve(RadialField(r, np.tile(E3, (41, 1))), SCHRODINGER, 0.02,
                      EvolveConfig(store_every=10))
        assert great_circle_deviation(traj, (1.0, 0.0, 0.0)) == 0.0

    def test_heat_flow_preserves_circle(self):
        r = make_grid(10.0, 121)
        traj = evolve(great_circle_bump(r, 0.5, 3.0, 1.0), HEAT, 0.1,
                      EvolveConfig(store_every=50))
        assert great_circle_deviation(traj, (1.0, 0.0, 0.0)) <= 1e-8

    def test_schrodinger_leaves_circle(self):
        r = make_grid(10.0, 121)
        traj = evolve(great_circle_bump(r, 0.5, 3.0, 1.0), SCHRODINGER, 0.1,
                      EvolveConfig(store_every=50))
        assert great_circle_deviation(traj, (1.0, 0.0, 0.0)) >= 1e-3

    def test_rejects_parallel_axis(self):
        r = make_grid(8.0, 41)
        traj = evolve(RadialField(r, np.tile(E3, (41, 1))), HEAT, 0.01,
                      EvolveConfig(store_every=10))
        with pytest.raises(DomainError):
            great_circle_deviation(traj, (0.0, 0.0, 1.0))


class TestEnergyMonotonicity:
    def test_heat_flow_dissipates(self):
        r = make_grid(10.0, 101)
        traj = evolve(great_circle_bump(r, 0.6, 3.0, 1.0), HEAT, 0.1,
                      EvolveConfig(store_every=20))
        E = energy_history(traj)
        assert np.all(np.diff(E) <= 1e-6)


class TestSelfsimConsistency:
    def test_trivial_profile(self):
        prof = solve_profile((0.0, 0.0), HEAT, 15.0)
        l2, linf = selfsim_consistency(prof, 1.0, HEAT)
        assert l2 == 0.0 and linf == 0.0

    def test_heat_profile_residual_small(self):
        prof = solve_profile((1.0, 0.0), HEAT, 25.0, max_step=0.05)
        l2, linf = selfsim_consistency(prof, 1.0, HEAT)
        assert l2 <= 1e-6

    def test_time_rescaling_identity(self):
        prof = solve_profile((1.0, 0.0), HEAT, 15.0, max_step=0.1)
        l2_1, _ = selfsim_consistency(prof, 1.0, HEAT)
        l2_4, _ = selfsim_consistency(prof, 4.0, HEAT)
        assert abs(4.0 * l2_4 - l2_1) <= 1e-12 * max(1.0, l2_1)

    def test_refinement_shrinks_residual(self):
        # tightening the tolerance refines the profile grid and the
        # substitution residual drops at the differentiation order
        l2s = []
        for tol in (1e-6, 1e-8, 1e-10):
            p = solve_profile((1.0, 0.0), HEAT, 15.0, rel_tol=tol)
            l2s.append(selfsim_consistency(p, 1.0, HEAT)[0])
        assert l2s[0] > 5 * l2s[1] > 25 * l2s[2]

    def test_tracking_the_rescaled_profile(self):
        # start the PDE from psi(r/sqrt(1)); at t = 1.5 it must match
        # psi(r/sqrt(1.5)) to second order in the grid spacing
        prof = solve_profile((1.0, 0.0), HEAT, 40.0)
        errs = []
        for N in (101, 201):
            r = make_grid(25.0, N)
            field0 = field_from_profile(prof, r, 1.0)
            traj = evolve(field0, HEAT, 0.5, EvolveConfig(store_every=10**9))
            target = field_from_profile(prof, r, 1.5)
            errs.append(float(np.max(np.linalg.norm(traj.frames[-1].u - target.u, axis=1))))
        assert errs[1] <= errs[0] / 3.0
        assert errs[1] <= 2.0 * (25.0 / 200) ** 2
