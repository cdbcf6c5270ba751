import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenosim.lindblad import DecoherenceParams, closed_form_rho_rotating
from zenosim.noise import NoiseModel
from zenosim.qubit import SystemHamiltonian
from zenosim.zeno import (EngineKind, NoiseReset, ProtocolConfig, ProtocolKind,
                          ProtocolResult, coherence_ratio, figure2_sweep,
                          figure3_surface, nonselective_coherence,
                          nonselective_rho, nonselective_run_mc, pn_analytic,
                          pn_approx, run_protocol, selective_run_mc,
                          selective_step_probability)

FIG2 = DecoherenceParams.from_times(1000.0, 20.0)
FIG3 = DecoherenceParams.from_times(1000.0, 400.0)

# exact scalar evaluations of the success-probability product at T1=1000,
# T2=20, t=20 ns (exponent per interval: -tau/2000 - tau^2/400)
P1_AT_20 = 0.6821094897857617
P4_AT_20 = 0.8799520410662889
P10_AT_20 = 0.9466283139369741
STEP_TAU5 = 0.9685337316887017
STEP_TAU2 = 0.9945301393876844
# 0.5 exp(-0.2 - 1) and 0.5 exp(-0.2 - 1/16) at T1=1000, T2=400, t=400 ns
ABS01_N1 = 0.15059710595610107
ABS01_N16 = 0.38456318218428526
# (1 - 0.00125) exp(-0.00625) at T1=1000, T2=20, t=5, N=5
APPROX_T5_N5 = 0.9925272787601155


def mc_config(t, n, m=20_000, seed=11, kind=ProtocolKind.SELECTIVE,
              reset=NoiseReset.RESAMPLE_PER_INTERVAL):
    return ProtocolConfig(t, n, kind, EngineKind.MONTE_CARLO, m, seed, reset)


class TestProtocolConfig:
    def test_rejects_zero_measurements(self):
        with pytest.raises(ValueError, match="measurements"):
            ProtocolConfig(10.0, 0)

    def test_mc_needs_enough_trajectories(self):
        with pytest.raises(ValueError, match="1000"):
            ProtocolConfig(10.0, 2, engine=EngineKind.MONTE_CARLO,
                           trajectories=500, base_seed=1)

    def test_mc_needs_seed(self):
        with pytest.raises(ValueError, match="base_seed"):
            ProtocolConfig(10.0, 2, engine=EngineKind.MONTE_CARLO, trajectories=2000)

    def test_tau(self):
        assert ProtocolConfig(20.0, 4).tau == 5.0

    def test_result_rejects_bad_probability(self):
        with pytest.raises(ValueError, match="probability"):
            ProtocolResult(ProtocolKind.SELECTIVE, EngineKind.ANALYTIC,
                           success_probability=1.5)

    def test_result_rejects_bad_coherence(self):
        with pytest.raises(ValueError, match="coherence"):
            ProtocolResult(ProtocolKind.NON_SELECTIVE, EngineKind.ANALYTIC,
                           coherence=0.7)


class TestSelectiveStepProbability:
    def test_spot_value(self):
        assert selective_step_probability(FIG2, 20.0) == pytest.approx(P1_AT_20, abs=1e-12)

    def test_short_interval_limit(self):
        assert selective_step_probability(FIG2, 1e-9) == pytest.approx(1.0, abs=1e-9)

    def test_no_decay_is_certain(self):
        assert selective_step_probability(DecoherenceParams(0.0, 0.0), 5.0) == 1.0

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            selective_step_probability(FIG2, 0.0)


class TestPnAnalytic:
    @pytest.mark.parametrize("n,expected", [(1, P1_AT_20), (4, P4_AT_20), (10, P10_AT_20)])
    def test_spot_values(self, n, expected):
        assert pn_analytic(FIG2, 20.0, n) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n,step", [(4, STEP_TAU5), (10, STEP_TAU2)])
    def test_per_step_factors(self, n, step):
        assert selective_step_probability(FIG2, 20.0 / n) == pytest.approx(step, abs=1e-12)

    def test_zero_time(self):
        assert pn_analytic(FIG2, 0.0, 5) == 1.0

    def test_rejects_negative_time(self):
        for op in (pn_analytic, pn_approx, nonselective_coherence):
            with pytest.raises(ValueError, match=">= 0"):
                op(FIG2, -5.0, 3)

    def test_zeno_limit_without_relaxation(self):
        params = DecoherenceParams.from_times(math.inf, 20.0)
        assert pn_analytic(params, 20.0, 10 ** 6) > 1.0 - 1e-6

    @given(st.floats(5.0, 500.0), st.floats(10.0, 200.0), st.floats(0.01, 1.75),
           st.integers(1, 29))
    @settings(max_examples=80, deadline=None)
    def test_monotone_in_n_for_sweep_regime(self, t2, t1_factor, t_factor, n):
        # quadratic-decay suppression: more measurements never hurt while the
        # run is shorter than ~T2 and relaxation is comparatively slow
        params = DecoherenceParams.from_times(t2 * t1_factor, t2)
        t = t2 * t_factor
        assert pn_analytic(params, t, n + 1) >= pn_analytic(params, t, n) - 1e-15


class TestPnApprox:
    def test_spot_value(self):
        assert pn_approx(FIG2, 5.0, 5) == pytest.approx(APPROX_T5_N5, abs=1e-12)

    def test_limit_is_unity(self):
        params = DecoherenceParams.from_times(math.inf, 20.0)
        assert pn_approx(params, 5.0, 10 ** 9) == pytest.approx(1.0, abs=1e-8)

    def test_close_to_exact_product(self):
        for n in range(1, 11):
            assert abs(pn_approx(FIG2, 5.0, n) - pn_analytic(FIG2, 5.0, n)) <= 0.02


class TestNonselective:
    def test_populations_equalised(self):
        rho = nonselective_rho(FIG3, 400.0, 4)
        assert rho.populations == pytest.approx((0.5, 0.5), abs=1e-12)

    @pytest.mark.parametrize("n,expected", [(1, ABS01_N1), (16, ABS01_N16)])
    def test_spot_values(self, n, expected):
        assert nonselective_coherence(FIG3, 400.0, n) == pytest.approx(expected, abs=1e-12)

    def test_many_measurements_leave_relaxation_floor(self):
        # only the quadratic (low-frequency) part is suppressed
        floor = 0.5 * math.exp(-400.0 / 2000.0)
        assert nonselective_coherence(FIG3, 400.0, 10 ** 9) == pytest.approx(floor, abs=1e-9)

    def test_single_measurement_equals_closed_form(self):
        # N=1 reduces to the free closed-form coherence, bit for bit
        for t in (25.0, 400.0, 913.0):
            closed = closed_form_rho_rotating(FIG3, t).matrix[0, 1].real
            assert nonselective_coherence(FIG3, t, 1) == closed

    def test_frame_preserves_coherence_magnitude(self):
        params = DecoherenceParams.from_times(1000.0, 400.0, SystemHamiltonian(0.9, 0.0))
        rho = nonselective_rho(params, 400.0, 4)
        assert rho.coherence == pytest.approx(nonselective_coherence(params, 400.0, 4),
                                              abs=1e-12)


class TestCoherenceRatio:
    def test_spot_value(self):
        assert coherence_ratio(FIG3, 400.0, 1) == pytest.approx(0.36787944117144233, abs=1e-12)

    def test_unity_at_zero_time(self):
        assert coherence_ratio(FIG3, 0.0, 7) == 1.0

    def test_t1_independent(self):
        values = []
        for t1 in (200.0, 1000.0, math.inf):
            params = DecoherenceParams.from_times(t1, 400.0)
            values.append(coherence_ratio(params, 400.0, 4))
        assert max(values) - min(values) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 4, 16])
    def test_matches_suppressed_exponent(self, n):
        expected = math.exp(-((400.0 / 400.0) ** 2) / n)
        assert coherence_ratio(FIG3, 400.0, n) == pytest.approx(expected, abs=1e-12)


class TestSelectiveMonteCarlo:
    def test_no_decoherence_always_succeeds(self):
        result = selective_run_mc(DecoherenceParams(0.0, 0.0), mc_config(20.0, 5, m=2000))
        assert result.success_probability == 1.0
        assert result.survivors_per_step == (2000,) * 5

    def test_requires_mc_engine(self):
        with pytest.raises(ValueError, match="monte-carlo"):
            selective_run_mc(FIG2, ProtocolConfig(20.0, 4))

    def test_requires_selective_kind(self):
        with pytest.raises(ValueError, match="selective"):
            selective_run_mc(FIG2, mc_config(20.0, 4, kind=ProtocolKind.NON_SELECTIVE))

    def test_matches_analytic_product(self):
        result = selective_run_mc(FIG2, mc_config(20.0, 4, m=100_000))
        dev = abs(result.success_probability - pn_analytic(FIG2, 20.0, 4))
        assert dev <= 3.0 * result.success_stderr

    def test_single_measurement_reduces_to_step_probability(self):
        result = selective_run_mc(FIG2, mc_config(20.0, 1, m=100_000, seed=5))
        dev = abs(result.success_probability - selective_step_probability(FIG2, 20.0))
        assert dev <= 3.0 * result.success_stderr

    def test_deterministic(self):
        a = selective_run_mc(FIG2, mc_config(20.0, 4))
        b = selective_run_mc(FIG2, mc_config(20.0, 4))
        assert a.success_probability == b.success_probability
        assert a.survivors_per_step == b.survivors_per_step

    def test_survivors_monotone(self):
        result = selective_run_mc(FIG2, mc_config(30.0, 10, m=50_000))
        counts = result.survivors_per_step
        assert all(counts[i + 1] <= counts[i] for i in range(len(counts) - 1))

    def test_persistent_noise_never_below_resampled(self):
        # with one frozen noise value per run the all-success probability is
        # E[q(f0)^N] >= (E[q(f0)])^N; deviations from the per-interval product
        # are reported, not asserted
        resampled = selective_run_mc(FIG2, mc_config(20.0, 5, m=100_000, seed=8))
        persistent = selective_run_mc(
            FIG2, mc_config(20.0, 5, m=100_000, seed=8, reset=NoiseReset.PERSISTENT))
        slack = 3.0 * (resampled.success_stderr + persistent.success_stderr)
        assert persistent.success_probability >= resampled.success_probability - slack

    def test_ou_noise_matches_gaussian_phase_variance(self):
        # independent oracle: the phase after time t is Gaussian with variance
        # 2 lambda^2 (tau_c t - tau_c^2 (1 - exp(-t/tau_c))), so a single
        # projection succeeds with probability 1/2 + exp(-2 Var)/2
        lam, tau_c, t = 0.25, 0.5, 2.5
        noise = NoiseModel.ornstein_uhlenbeck(lam, tau_c)
        free = DecoherenceParams(0.0, 0.0)
        result = selective_run_mc(free, mc_config(t, 1, m=50_000, seed=13), noise)
        variance = 2.0 * lam ** 2 * (tau_c * t - tau_c ** 2 * (1.0 - math.exp(-t / tau_c)))
        expected = 0.5 + 0.5 * math.exp(-2.0 * variance)
        assert abs(result.success_probability - expected) <= 3.0 * result.success_stderr

    def test_ou_persistent_path_also_matches_for_single_interval(self):
        lam, tau_c, t = 0.25, 0.5, 2.5
        noise = NoiseModel.ornstein_uhlenbeck(lam, tau_c)
        free = DecoherenceParams(0.0, 0.0)
        result = selective_run_mc(free, mc_config(t, 1, m=50_000, seed=14,
                                                  reset=NoiseReset.PERSISTENT), noise)
        variance = 2.0 * lam ** 2 * (tau_c * t - tau_c ** 2 * (1.0 - math.exp(-t / tau_c)))
        expected = 0.5 + 0.5 * math.exp(-2.0 * variance)
        assert abs(result.success_probability - expected) <= 3.0 * result.success_stderr


class TestNonselectiveMonteCarlo:
    def test_matches_analytic_coherence(self):
        result = nonselective_run_mc(
            FIG3, mc_config(400.0, 4, m=100_000, kind=ProtocolKind.NON_SELECTIVE))
        dev = abs(result.coherence - nonselective_coherence(FIG3, 400.0, 4))
        assert dev <= 3.0 * result.coherence_stderr

    def test_final_state_has_equal_populations(self):
        result = nonselective_run_mc(
            FIG3, mc_config(400.0, 2, m=2000, kind=ProtocolKind.NON_SELECTIVE))
        assert result.final_rho.populations == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_deterministic(self):
        a = nonselective_run_mc(FIG3, mc_config(400.0, 4, kind=ProtocolKind.NON_SELECTIVE))
        b = nonselective_run_mc(FIG3, mc_config(400.0, 4, kind=ProtocolKind.NON_SELECTIVE))
        assert a.coherence == b.coherence


class TestRunProtocol:
    def test_analytic_selective(self):
        result = run_protocol(FIG2, ProtocolConfig(20.0, 4))
        assert result.success_probability == pytest.approx(P4_AT_20, abs=1e-12)

    def test_analytic_nonselective(self):
        config = ProtocolConfig(400.0, 16, kind=ProtocolKind.NON_SELECTIVE)
        result = run_protocol(FIG3, config)
        assert result.coherence == pytest.approx(ABS01_N16, abs=1e-12)

    def test_mc_dispatch(self):
        result = run_protocol(FIG2, mc_config(20.0, 2, m=2000))
        assert result.engine is EngineKind.MONTE_CARLO
        assert result.success_probability is not None


class TestFigure2Sweep:
    def test_analytic_columns(self):
        table = figure2_sweep(FIG2)
        assert table.columns == ("t", "N", "P_analytic", "P_mc", "P_mc_stderr")
        assert len(table.rows) == 4 * 20
        assert all(row[3] is None and row[4] is None for row in table.rows)

    def test_curves_ordered_by_total_time(self):
        table = figure2_sweep(FIG2)
        by_time = {t: [r[2] for r in table.rows if r[0] == t] for t in (20.0, 25.0, 30.0, 35.0)}
        for n_index in range(20):
            assert by_time[20.0][n_index] > by_time[25.0][n_index] \
                > by_time[30.0][n_index] > by_time[35.0][n_index]

    def test_each_curve_monotone(self):
        table = figure2_sweep(FIG2)
        for t in (20.0, 25.0, 30.0, 35.0):
            curve = [r[2] for r in table.rows if r[0] == t]
            assert all(curve[i + 1] >= curve[i] for i in range(len(curve) - 1))

    def test_first_point_is_step_probability(self):
        table = figure2_sweep(FIG2)
        for t in (20.0, 25.0, 30.0, 35.0):
            first = [r for r in table.rows if r[0] == t and r[1] == 1][0]
            assert first[2] == pytest.approx(selective_step_probability(FIG2, t), abs=1e-15)

    def test_mc_columns_filled(self):
        table = figure2_sweep(FIG2, times=(20.0,), n_max=2, trajectories=2000, base_seed=3)
        for row in table.rows:
            assert row[3] is not None and row[4] is not None


class TestFigure3Surface:
    def test_monotone_in_measurements_at_fixed_time(self):
        table = figure3_surface(FIG3, np.linspace(50.0, 800.0, 16), range(1, 17))
        for t in set(r[0] for r in table.rows):
            curve = [r[2] for r in table.rows if r[0] == t]
            assert all(curve[i + 1] >= curve[i] for i in range(len(curve) - 1))

    def test_nonincreasing_in_time_at_fixed_n(self):
        table = figure3_surface(FIG3, np.linspace(50.0, 800.0, 16), range(1, 17))
        for n in range(1, 17):
            curve = [r[2] for r in table.rows if r[1] == n]
            assert all(curve[i + 1] <= curve[i] for i in range(len(curve) - 1))

    def test_spot_values(self):
        table = figure3_surface(FIG3, [400.0], [1, 16])
        assert table.rows[0][2] == pytest.approx(ABS01_N1, abs=1e-12)
        assert table.rows[1][2] == pytest.approx(ABS01_N16, abs=1e-12)
