import math

import numpy as np
import pytest

from hallmhd.initial_data import gen_beltrami, gen_orszag_tang_3d
from hallmhd.littlewood_paley import besov_norm, norm_report, sobolev_norm_hom
from hallmhd.monitor import (
    AdmissibilityError,
    CriterionConfig,
    DiagnosticsLedger,
    apriori_besov_check,
    check_exponent_pair,
    energy_ledger_check,
    gradb_key,
    hall_work,
    serrin_key,
    smallness_gate_besov,
    smallness_gate_sobolev,
)
from hallmhd.solver import Regime, SolverState, StepControl, run
from hallmhd.spectral import Grid, l2_norm, to_spectral, zeros

G = Grid(16)
VOL = G.volume


def sine_vec(k=1, amp=1.0):
    x1 = G.mesh()[0]
    z = np.zeros(G.shape)
    return to_spectral(np.stack([z, amp * np.sin(k * x1), z]), G)


def beltrami_run(dt, t_end, cadence=1, lam=1):
    b0 = gen_beltrami(G, 1.0, lam).b0
    ledger = DiagnosticsLedger(CriterionConfig(sample_cadence=cadence))
    s = SolverState(0.0, zeros(G), b0, Regime.HALL_ONLY, 1.0)
    run(s, StepControl(dt=dt, t_end=t_end), [(cadence, ledger.hook())])
    return b0, ledger


class TestAdmissibility:
    @pytest.mark.parametrize("p,q", [(math.inf, 2), (4, 8), (6, 4), ("inf", 2), (math.inf, math.inf), (3.5, 14)])
    def test_accepts(self, p, q):
        check_exponent_pair(p, q)

    @pytest.mark.parametrize("p,q", [(3, 2), (2, math.inf), (4, 4), (math.inf, 0.5), (6, 3)])
    def test_rejects(self, p, q):
        with pytest.raises(AdmissibilityError):
            check_exponent_pair(p, q)

    def test_config_validates(self):
        with pytest.raises(AdmissibilityError):
            CriterionConfig(serrin_pairs=((3, 2),))
        with pytest.raises(AdmissibilityError):
            CriterionConfig(beta_gamma_pairs=((4, 4),))
        with pytest.raises(ValueError):
            CriterionConfig(sample_cadence=0)

    def test_keys(self):
        assert serrin_key(math.inf, 2) == "serrin_u_pinf_q2"
        assert gradb_key(4, 8) == "serrin_gradb_p4_q8"


class TestSampling:
    def test_zero_state(self):
        ledger = DiagnosticsLedger()
        rec = ledger.sample(SolverState(0.0, zeros(G), zeros(G), Regime.FULL_3D, 1.0), 0)
        numeric = [v for k, v in rec.items() if isinstance(v, float)]
        assert all(v == 0 for v in numeric)
        assert all(v == 0 for v in rec["u"].values())

    def test_first_sample_matches_direct(self):
        d = gen_orszag_tang_3d(G, 0.5)
        ledger = DiagnosticsLedger()
        rec = ledger.sample(SolverState(0.0, d.u0, d.b0, Regime.FULL_3D, 1.0), 0)
        assert rec["u"] == norm_report(d.u0).to_dict()
        assert rec["energy"] == pytest.approx(0.5 * (l2_norm(d.u0) ** 2 + l2_norm(d.b0) ** 2))
        assert rec["besov_sum"] == pytest.approx(besov_norm(d.u0, 0.5) + besov_norm(d.b0, 0.5) + besov_norm(d.b0, 1.5))
        assert rec["dissipation_integral"] == 0.0
        assert rec[f"{serrin_key(4, 8)}_accumulator"] == 0.0
        # q = inf accumulates a running max, starting at the first value
        key = serrin_key(math.inf, 2)
        assert rec[f"{key}_integrand"] == pytest.approx(rec["u"]["lp_pinf"] ** 2)

    def test_beltrami_dissipation_integral(self):
        lam, t = 1, 0.1
        b0, ledger = beltrami_run(1e-3, t, lam=lam)
        grad0 = sobolev_norm_hom(b0, 1.0) ** 2
        exact = grad0 * (1 - math.exp(-2 * lam**2 * t)) / (2 * lam**2)
        assert ledger.records[-1]["dissipation_integral"] == pytest.approx(exact, rel=1e-6)

    def test_accumulators_nondecreasing(self):
        _, ledger = beltrami_run(2e-3, 0.1, cadence=5)
        keys = [k for k in ledger.records[0] if k.endswith("_accumulator") or k.endswith("_integral")]
        assert keys
        for k in keys:
            assert np.all(np.diff(ledger.series(k)) >= 0), k

    def test_jsonl_round_trip(self, tmp_path):
        _, ledger = beltrami_run(5e-3, 0.05, cadence=5)
        path = tmp_path / "l.jsonl"
        ledger.write_jsonl(path)
        back = DiagnosticsLedger.read_jsonl(path)
        assert back.to_jsonl() == ledger.to_jsonl()
        assert back.reports("b")[0].to_dict() == ledger.records[0]["b"]


class TestHallWork:
    def test_beltrami_has_no_hall_work(self):
        w, scale = hall_work(gen_beltrami(G).b0)
        assert w <= 1e-12 * max(scale, 1.0)

    def test_generic_field(self):
        w, scale = hall_work(gen_orszag_tang_3d(G, 0.5).b0)
        assert scale > 0
        assert w <= 1e-11 * scale


class TestGates:
    def test_sobolev_zero(self):
        g = smallness_gate_sobolev(zeros(G), zeros(G), 0.5)
        assert g.passed and g.margin == 0.5

    def test_sobolev_single_mode(self):
        a = 0.2
        f = sine_vec(1, a)
        g = smallness_gate_sobolev(f, f, 10.0)
        assert g.value == pytest.approx(2 * a * math.sqrt(VOL / 2), rel=1e-12)
        g10 = smallness_gate_sobolev(f * 10, f * 10, 10.0)
        assert g10.value == pytest.approx(10 * g.value, rel=1e-13)

    def test_besov_single_shell(self):
        b = sine_vec(2)
        g = smallness_gate_besov(zeros(G), b, 1e6)
        assert g.value == pytest.approx(2**1.5 * l2_norm(b), rel=1e-12)
        assert g.extra["interpolation_ratio"] == pytest.approx(1.0, rel=1e-12)

    def test_besov_u_only(self):
        u = sine_vec(3)
        g = smallness_gate_besov(u, zeros(G), 1.0)
        assert g.value == pytest.approx(besov_norm(u, 0.5))
        assert not g.passed

    def test_zero_passes(self):
        assert smallness_gate_besov(zeros(G), zeros(G), 1e-6).passed


class TestChecks:
    def test_apriori_zero_run(self):
        ledger = DiagnosticsLedger()
        s = SolverState(0.0, zeros(G), zeros(G), Regime.FULL_3D, 1.0)
        run(s, StepControl(dt=0.1, t_end=0.3), [(1, ledger.hook())])
        rep = apriori_besov_check(ledger)
        assert rep.passed is True

    def test_apriori_skipped_when_gate_fails(self):
        b0, ledger = beltrami_run(5e-3, 0.05, cadence=5)
        gate = smallness_gate_besov(zeros(G), b0, 1e-3)
        rep = apriori_besov_check(ledger, gate=gate)
        assert rep.gate_passed is False and rep.passed is None

    def test_energy_ledger_zero(self):
        ledger = DiagnosticsLedger(energy_only=True)
        run(SolverState(0.0, zeros(G), zeros(G), Regime.FULL_3D, 1.0), StepControl(dt=0.1, t_end=0.3), [(1, ledger.hook())])
        res = energy_ledger_check(ledger, 0.1)
        assert res.residual == 0 and res.passed

    def test_energy_ledger_pure_heat(self):
        u0 = sine_vec(1, 1e-6)
        ledger = DiagnosticsLedger(energy_only=True)
        run(SolverState(0.0, u0, zeros(G), Regime.FULL_3D, 1.0), StepControl(dt=1e-2, t_end=0.5), [(1, ledger.hook())])
        res = energy_ledger_check(ledger, 1e-2)
        assert abs(res.residual) <= 1e-10 and res.passed

    def test_energy_ledger_richardson_beltrami(self):
        residuals = []
        for dt in (4e-3, 2e-3):
            b0 = gen_beltrami(G).b0
            ledger = DiagnosticsLedger(energy_only=True)
            run(SolverState(0.0, zeros(G), b0, Regime.HALL_ONLY, 1.0), StepControl(dt=dt, t_end=0.2), [(1, ledger.hook())])
            res = energy_ledger_check(ledger, dt)
            assert res.passed
            residuals.append(res.residual)
        assert residuals[0] / residuals[1] == pytest.approx(4.0, rel=0.2)

    def test_energy_check_needs_two_samples(self):
        ledger = DiagnosticsLedger(energy_only=True)
        ledger.sample(SolverState(0.0, zeros(G), zeros(G), Regime.FULL_3D, 1.0), 0)
        with pytest.raises(ValueError):
            energy_ledger_check(ledger, 0.1)
