import numpy as np
import pytest

from krslab.config import koiso_cao
from krslab.geometry import (
    GeometryError,
    PinnedConstants,
    hessian_components,
    kaehler_residual,
    laplacian,
    log_weight_slope,
    ricci_components,
    volume_weight,
    weighted_integral,
    weighted_laplacian,
)


@pytest.fixture(scope="module")
def kc():
    return koiso_cao()


class TestPinnedConstants:
    def test_unpinned_rejected(self):
        with pytest.raises(GeometryError):
            PinnedConstants(A=0.25, B=0.5).require_pinned()
        with pytest.raises(GeometryError):
            PinnedConstants(A=0.25, B=0.5, max_rel_err=1e-3).require_pinned()

    def test_round_trip_file(self, tmp_path, constants):
        import json

        path = tmp_path / "c.json"
        path.write_text(json.dumps(constants.to_dict()))
        loaded = PinnedConstants.load(str(path))
        assert (loaded.A, loaded.B) == (constants.A, constants.B)
        loaded.require_pinned()


class TestProfileInvariants:
    def test_momentum_solution_validates(self, kc_momentum):
        assert kc_momentum.grid.validate()

    def test_corrupt_collapse_detected(self, kc_momentum):
        from dataclasses import replace

        g = kc_momentum.grid
        bad = replace(g, f=g.f + 0.1)
        with pytest.raises(GeometryError):
            bad.validate()

    def test_kaehler_residual_zero_on_solution(self, kc_momentum, kc):
        res = kaehler_residual(kc_momentum.grid, kc)
        assert np.abs(res).max() < 1e-12

    def test_kaehler_residual_detects_detuned_profile(self, kc_momentum, kc):
        from dataclasses import replace

        g = kc_momentum.grid
        bad = replace(g, l=g.l * 1.01)
        assert np.abs(kaehler_residual(bad, kc)).max() > 1e-3


class TestRicci:
    def test_soliton_equation_satisfied(self, kc_momentum, kc, constants):
        # Ric + Hess u = g on the solved profiles, all frame directions
        g = kc_momentum.grid
        ric = ricci_components(g, kc, constants)
        H_NN, H_UU, H_i = hessian_components(g, g.u, g.du, g.ddu)
        assert np.abs(ric.R_NN + H_NN - 1.0).max() < 1e-10
        assert np.abs(ric.R_UU + H_UU - 1.0).max() < 1e-10
        assert np.abs(ric.R_i + H_i - 1.0).max() < 1e-10

    def test_scalar_curvature_trace(self, kc_momentum, kc, constants):
        g = kc_momentum.grid
        ric = ricci_components(g, kc, constants)
        trace = ric.R_NN + ric.R_UU + (kc.d[:, None] * ric.R_i).sum(axis=0)
        assert np.abs(ric.R - trace).max() == 0.0

    def test_endpoint_values_finite_and_even(self, kc_momentum, kc,
                                             constants):
        g = kc_momentum.grid
        ric = ricci_components(g, kc, constants)
        for comp in (ric.R_NN, ric.R_UU, ric.R):
            assert np.all(np.isfinite(comp))
            # endpoint filled by even extrapolation must match neighbors
            assert abs(comp[0] - comp[1]) < 0.05 * max(1.0, abs(comp[1]))

    def test_factor_mismatch_rejected(self, two_factor_momentum, kc,
                                      constants):
        with pytest.raises(Exception):
            ricci_components(two_factor_momentum.grid, kc, constants)


class TestWeightedCalculus:
    def test_volume_weight_vanishes_at_collapse(self, kc_momentum, kc):
        w = volume_weight(kc_momentum.grid, kc)
        assert w[0] == 0.0 and w[-1] == 0.0
        assert np.all(w[1:-1] > 0)

    def test_weighted_integral_linear(self, kc_momentum, kc):
        g = kc_momentum.grid
        a = weighted_integral(g, kc, g.u)
        b = weighted_integral(g, kc, np.ones_like(g.u))
        combo = weighted_integral(g, kc, 2.0 * g.u + 3.0)
        assert combo == pytest.approx(2.0 * a + 3.0 * b, rel=1e-12)

    def test_drift_laplacian_self_adjoint(self, kc_momentum, kc):
        # int (Delta_u v) w e^{-u} = - int v' w' ... = int v (Delta_u w)
        g = kc_momentum.grid
        D = g.scheme.D
        t, T = g.t, g.T
        v = np.cos(np.pi * t / T)
        w = np.cos(2.0 * np.pi * t / T)
        lv = weighted_laplacian(g, kc, v, D @ v, D @ (D @ v))
        lw = weighted_laplacian(g, kc, w, D @ w, D @ (D @ w))
        lhs = weighted_integral(g, kc, lv * w)
        rhs = weighted_integral(g, kc, v * lw)
        assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_drift_laplacian_kills_constants(self, kc_momentum, kc):
        g = kc_momentum.grid
        z = np.zeros_like(g.u)
        const = np.full_like(g.u, 3.7)
        assert np.abs(weighted_laplacian(g, kc, const, z, z)).max() == 0.0

    def test_laplacian_minus_drift_is_du_dv(self, kc_momentum, kc):
        g = kc_momentum.grid
        D = g.scheme.D
        v = g.t**2 * (g.T - g.t) ** 2
        dv, ddv = D @ v, D @ (D @ v)
        gap = (laplacian(g, kc, v, dv, ddv)
               - weighted_laplacian(g, kc, v, dv, ddv))
        assert np.abs(gap - g.du * dv).max() < 1e-12

    def test_log_weight_slope_interior_formula(self, kc_momentum, kc):
        g = kc_momentum.grid
        lw = log_weight_slope(g, kc)
        k = g.t.size // 2
        expected = (g.df[k] / g.f[k]
                    + (kc.d * g.dl[:, k] / g.l[:, k]).sum())
        assert lw[k] == pytest.approx(expected, rel=1e-13)
