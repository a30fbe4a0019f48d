import numpy as np
import pytest

from krslab.config import BaseFactor, BundleConfig
from krslab.geometry import PinnedConstants
from krslab import solver


class TestMomentum:
    def test_koiso_cao_slope_and_length(self, kc_momentum):
        # reference values from an independent high-precision run of the
        # scalar closure condition (the literature's soliton is recovered)
        assert kc_momentum.c_slope == pytest.approx(0.5276195198969629,
                                                    abs=1e-12)
        assert kc_momentum.grid.T == pytest.approx(3.198164957102434,
                                                   abs=1e-9)

    def test_residuals_at_machine_precision(self, kc_momentum):
        rep = kc_momentum.residuals
        assert rep.max_equation_residual() < 1e-12
        assert rep.hamilton < 1e-12
        assert rep.delta_uu < 1e-10

    def test_factor_sizes_at_the_ends(self, kc_momentum):
        # l^2 = q s + p - q runs from p - q = 1 to p + q = 3
        g = kc_momentum.grid
        assert g.l[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert g.l[0, -1] == pytest.approx(np.sqrt(3.0), abs=1e-12)

    def test_gauge_normalized(self, kc_momentum):
        assert kc_momentum.residuals.gauge < 1e-14
        # the normalizing shift equals the reduction slope c
        assert kc_momentum.gauge_shift == pytest.approx(kc_momentum.c_slope,
                                                        abs=1e-10)

    def test_unpinned_constants_rejected(self, kc_config):
        with pytest.raises(Exception):
            solver.solve_momentum(kc_config, PinnedConstants(0.25, 0.5))

    def test_wrong_constants_rejected(self, kc_config):
        wrong = PinnedConstants(A=0.125, B=0.5, max_rel_err=1e-9, samples=5)
        with pytest.raises(solver.SolverError):
            solver.solve_momentum(kc_config, wrong)

    def test_degenerate_factor_reports_no_soliton(self, constants):
        # p = q makes l vanish at the near end: not an admissible soliton
        cfg = BundleConfig(factors=(BaseFactor(d=2, p=1.0, q=1),))
        with pytest.raises(solver.NoSolitonFound):
            solver.solve_momentum(cfg, constants)

    def test_uniform_scheme_agrees(self, kc_config, constants, kc_momentum):
        uni = solver.solve_momentum(kc_config, constants, nodes=256,
                                    scheme="uniform")
        assert uni.c_slope == pytest.approx(kc_momentum.c_slope, abs=1e-12)
        assert uni.residuals.max_equation_residual() < 1e-10


class TestShooting:
    def test_koiso_cao_matches_momentum(self, kc_momentum, kc_config,
                                        constants):
        sho = solver.solve_shooting(kc_config, constants, nodes=512)
        assert sho.c_slope == pytest.approx(kc_momentum.c_slope, abs=1e-8)
        assert sho.grid.T == pytest.approx(kc_momentum.grid.T, abs=1e-8)
        assert solver.cross_method_disagreement(kc_momentum, sho) < 1e-8

    def test_kaehler_monitored_not_imposed(self, kc_shooting_2048):
        # the bulk integration never enforces the Kahler condition; its
        # drift staying at roundoff is a genuine cross-check
        assert kc_shooting_2048.residuals.kaehler < 1e-10

    def test_first_integral_constancy(self, kc_shooting_2048):
        assert kc_shooting_2048.residuals.hamilton < 1e-10

    def test_two_factor_agreement(self, two_factor_momentum,
                                  two_factor_shooting):
        d = solver.cross_method_disagreement(two_factor_momentum,
                                             two_factor_shooting)
        assert d < 1e-8
        assert two_factor_shooting.c_slope == pytest.approx(
            two_factor_momentum.c_slope, abs=1e-8)

    def test_explicit_initial_guess_accepted(self, kc_config, constants,
                                             kc_momentum):
        x0 = np.array([0.9, 0.3])
        sho = solver.solve_shooting(kc_config, constants, nodes=256, x0=x0)
        assert sho.c_slope == pytest.approx(kc_momentum.c_slope, abs=1e-8)

    def test_bad_guess_raises(self, kc_config, constants):
        with pytest.raises(solver.SolverError):
            solver.solve_shooting(kc_config, constants, nodes=128,
                                  x0=np.array([-1.0, 0.25]))


class TestReports:
    def test_report_serializes(self, kc_momentum):
        d = kc_momentum.to_dict()
        assert d["method"] == "momentum"
        assert "E_N" in d["residuals"]
        assert d["T"] > 0

    def test_attach_cross_method(self, kc_momentum, kc_shooting_2048):
        tagged = solver.attach_cross_method(kc_momentum, kc_shooting_2048)
        assert tagged.residuals.cross_method is not None
        assert tagged.residuals.cross_method < 1e-8

    def test_identity_suite_keys(self, kc_momentum):
        suite = solver.identity_suite(kc_momentum)
        for key in ("delta_uu_plus_2u", "trace_R_plus_lap_u_minus_n",
                    "hamilton_constancy", "weighted_mean_u", "div_integral",
                    "kaehler"):
            assert suite[key] < 1e-8
