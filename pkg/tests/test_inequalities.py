import math

import numpy as np
import pytest

from hallmhd import inequalities as ineq
from hallmhd.spectral import Grid, to_spectral, zeros

G = Grid(16)
VOL = G.volume


def sine(k=1, axis=0, amp=1.0):
    return to_spectral(amp * np.sin(k * G.mesh()[axis])[None], G)


class TestBernstein:
    def test_exact_shell_edge_mode(self):
        # |k| = 4 = 2^2 sits on the upper edge of shell 2
        r = ineq.check_bernstein(sine(4), 2, order=1, p_low=2, p_high=math.inf)
        assert r.derivative == pytest.approx(1.0, rel=1e-12)
        assert r.inverse_derivative == pytest.approx(1.0, rel=1e-12)

    def test_zero_field(self):
        r = ineq.check_bernstein(zeros(G, 1), 2)
        assert (r.derivative, r.inverse_derivative, r.embedding) == (0.0, 0.0, 0.0)

    def test_embedding_single_mode(self):
        # ||sin 4x||_inf = 1, ||sin 4x||_2 = sqrt(vol/2), scale 2^{2*3*(1/2)} = 8
        r = ineq.check_bernstein(sine(4), 2)
        assert r.embedding == pytest.approx(1 / (8 * math.sqrt(VOL / 2)), rel=1e-12)

    def test_requires_shell_support(self):
        with pytest.raises(ValueError):
            ineq.check_bernstein(sine(1), 2)
        with pytest.raises(ValueError):
            ineq.check_bernstein(sine(4), 2, p_low=4, p_high=2)


class TestEquivalence:
    def test_single_mode(self):
        # grad sin(3x) = 3 cos(3x) e_1 in shell 2, against 2^{2(s+1)} ||sin 3x||
        s = 0.5
        assert ineq.check_norm_equivalence(sine(3), s) == pytest.approx(3 / 2 ** (2 * (s + 1)) * 2 ** (2 * s), rel=1e-12)


class TestProductLaw:
    def test_sine_squared(self):
        # sin^2 x = 1/2 - cos(2x)/2: only the |k|=2 part counts, shell 1, weight 2^{3/2}
        r = ineq.check_product_law(sine(1), sine(1), 1.5, 1.5)
        assert r.ratio == pytest.approx(2 / math.sqrt(VOL), rel=1e-12)
        assert r.endpoint

    def test_constant_operand_rejected(self):
        c = to_spectral(np.ones((1,) + G.shape), G)
        with pytest.raises(ValueError):
            ineq.check_product_law(sine(1), c, 1.0, 1.0)

    @pytest.mark.parametrize("s1,s2", [(2.0, 1.0), (-1.0, 0.5), (-0.5, 0.5)])
    def test_index_constraints(self, s1, s2):
        with pytest.raises(ValueError):
            ineq.check_product_law(sine(1), sine(2), s1, s2)


class TestCommutatorRatio:
    def test_constant_u_rejected(self):
        u = to_spectral(np.ones((1,) + G.shape), G)
        with pytest.raises(ValueError):
            ineq.check_commutator(u, sine(2))

    def test_ratio_zero_when_shells_decouple(self):
        # u at |k|=1, w at |k|=1: products reach |k|<=2, shell 3 sees nothing
        assert ineq.commutator_ratio(sine(1, axis=1), sine(1), 3) < 1e-14


class TestInterpolation:
    def test_single_mode_saturates(self):
        for k in (1, 3, 5):
            assert ineq.check_interpolation(sine(k), 0.5, 1.5) == pytest.approx(1.0, rel=1e-12)

    def test_zero(self):
        assert ineq.check_interpolation(zeros(G, 1), 0.5, 1.5) == 0.0

    def test_two_equal_shells(self):
        # blocks of equal norm A in shells 0 and 1
        s, s1 = 0.5, 1.5
        theta = s / s1
        f = sine(1) + sine(2, axis=1)
        expected = (1 + 2**s) / ((1 + 2**s1) ** theta * math.sqrt(2) ** (1 - theta))
        assert ineq.check_interpolation(f, s, s1) == pytest.approx(expected, rel=1e-12)

    def test_parameter_checks(self):
        with pytest.raises(ValueError):
            ineq.check_interpolation(sine(1), 0.5, 1.5, theta=0.2)
        with pytest.raises(ValueError):
            ineq.check_interpolation(sine(1), 2.0, 1.5)


class TestBMOBound:
    def test_zero(self):
        assert ineq.check_bmo_bound(zeros(G, 1)) == 0.0

    def test_single_mode(self):
        a = 0.3
        assert ineq.check_bmo_bound(sine(1, amp=a)) == pytest.approx(1 / (1 + math.sqrt(VOL / 2)), rel=1e-12)


class TestSuiteMachinery:
    def test_rng_is_reproducible(self):
        a = ineq.make_rng(5).standard_normal(4)
        b = ineq.make_rng(5).standard_normal(4)
        np.testing.assert_array_equal(a, b)
        assert ineq.RNG_NAME.startswith("numpy.PCG64")

    def test_sample_ratios_deterministic(self):
        a = ineq.sample_ratios("bmo_bound", 5, seed=3)
        b = ineq.sample_ratios("bmo_bound", 5, seed=3)
        np.testing.assert_array_equal(a["ratio"], b["ratio"])

    def test_frozen_constants_shape(self):
        table = ineq.load_constants()
        assert table["samples"] == ineq.SUITE_SAMPLES
        assert set(table["constants"]) == set(ineq.ORACLES)
        for entries in table["constants"].values():
            assert all(math.isfinite(v) and v > 0 for v in entries.values())

    def test_random_field_band(self):
        f = ineq.random_field(G, ineq.make_rng(0), 2, 3)
        amp = np.abs(f.coeffs[0])
        assert np.all(amp[(G.kmag < 2 - 1e-9) | (G.kmag > 3 + 1e-9)] == 0)
        assert amp.max() > 0
