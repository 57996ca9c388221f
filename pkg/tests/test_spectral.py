import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallmhd.spectral import (
    Grid,
    SpectralField,
    curl,
    dealias,
    derivative,
    divergence,
    gradient,
    hermitian_defect,
    inner_product,
    l2_norm,
    laplacian,
    leray_project,
    lp_norm,
    make_grid,
    multiply_physical,
    resample,
    rescale_coordinates,
    to_physical,
    to_spectral,
    zeros,
)

G8 = Grid(8)
G16 = Grid(16)


def field(grid, arrays):
    return to_spectral(np.stack(arrays), grid)


def random_vector(grid, seed, band=None):
    rng = np.random.default_rng(seed)
    f = to_spectral(rng.standard_normal((3,) + grid.shape), grid)
    if band is not None:
        f = SpectralField(grid, f.coeffs * (grid.kmag <= band))
    return dealias(f)


class TestGrid:
    def test_lattice_and_mask_n8(self):
        g = make_grid(8, 2 * math.pi, 3)
        assert sorted(g.frequencies.tolist()) == list(range(-4, 4))
        # radial 2/3 rule: |k| <= 8/3
        expected = g.kmag <= 8 / 3
        np.testing.assert_array_equal(g.dealias_mask, expected)
        assert g.dealias_mask[2, 0, 0] and not g.dealias_mask[3, 0, 0]
        assert g.dealias_mask[2, 1, 0] and not g.dealias_mask[2, 2, 0]

    def test_smallest_grid(self):
        assert make_grid(4).size == 64

    def test_fundamental_wavenumber(self):
        g = make_grid(16, 4 * math.pi, 2)
        assert g.k0 == pytest.approx(0.5)
        assert g.wavevector[0][1, 0] == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [3, 7, 2, 0, -4, 5.5])
    def test_rejects_bad_n(self, n):
        with pytest.raises(ValueError):
            make_grid(n)

    def test_rejects_bad_dims_and_box(self):
        with pytest.raises(ValueError):
            Grid(8, 2 * math.pi, 4)
        with pytest.raises(ValueError):
            Grid(8, -1.0, 3)


class TestTransforms:
    def test_constant_field(self):
        f = to_spectral(np.full((1,) + G8.shape, 2.5), G8)
        assert f.coeffs[0, 0, 0, 0] == pytest.approx(2.5)
        f.coeffs[0, 0, 0, 0] = 0
        assert np.abs(f.coeffs).max() < 1e-15

    def test_sine_coefficients(self):
        x1 = G8.mesh()[0]
        f = to_spectral(np.sin(x1)[None], G8)
        # sin x = (e^{ix} - e^{-ix}) / 2i
        assert f.coeffs[0, 1, 0, 0] == pytest.approx(-0.5j)
        assert f.coeffs[0, -1, 0, 0] == pytest.approx(0.5j)
        f.coeffs[0, 1, 0, 0] = f.coeffs[0, -1, 0, 0] = 0
        assert np.abs(f.coeffs).max() < 1e-15

    def test_matches_numpy_fft(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((1,) + G8.shape)
        ref = np.fft.fftn(x[0]) / G8.size
        np.testing.assert_allclose(to_spectral(x, G8).coeffs[0], ref, atol=1e-15)

    @pytest.mark.parametrize("grid", [G16, Grid(16, 3.0, 2)])
    def test_white_noise_round_trip(self, grid):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((3,) + grid.shape)
        back = to_physical(to_spectral(x, grid))
        assert np.abs(back - x).max() <= 1e-12 * np.abs(x).max()

    def test_parseval(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((3,) + G16.shape)
        f = to_spectral(x, G16)
        direct = math.sqrt(np.sum(x**2) * G16.volume / G16.size)
        assert l2_norm(f) == pytest.approx(direct, rel=1e-12)
        assert lp_norm(f, 2) == pytest.approx(direct, rel=1e-12)

    def test_hermitian(self):
        f = random_vector(G8, 4)
        assert hermitian_defect(f) < 1e-15

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            to_spectral(np.zeros((1, 8, 8)), G8)

    def test_complex_samples_rejected(self):
        with pytest.raises(ValueError):
            to_spectral(np.ones((1,) + G8.shape) * 1j, G8)


class TestDifferentialOperators:
    def test_curl_of_sine(self):
        x1 = G16.mesh()[0]
        z = np.zeros(G16.shape)
        out = to_physical(curl(field(G16, [z, z, np.sin(x1)])))
        np.testing.assert_allclose(out[0], 0, atol=1e-13)
        np.testing.assert_allclose(out[1], -np.cos(x1), atol=1e-13)
        np.testing.assert_allclose(out[2], 0, atol=1e-13)

    def test_laplacian_of_sine(self):
        x1 = G16.mesh()[0]
        out = to_physical(laplacian(to_spectral(np.sin(x1)[None], G16)))
        np.testing.assert_allclose(out[0], -np.sin(x1), atol=1e-13)

    def test_derivative_on_scaled_box(self):
        g = Grid(16, 4 * math.pi, 2)
        x1, x2 = g.mesh()
        f = to_spectral(np.sin(0.5 * x2)[None], g)
        np.testing.assert_allclose(to_physical(derivative(f, 1))[0], 0.5 * np.cos(0.5 * x2), atol=1e-13)
        assert np.abs(derivative(f, 2).coeffs).max() == 0

    def test_divergence_of_curl(self):
        f = random_vector(G16, 5)
        assert np.abs(to_physical(divergence(curl(f)))).max() < 1e-12

    def test_curl_needs_vector(self):
        with pytest.raises(ValueError):
            curl(zeros(G8, 1))

    def test_gradient_needs_scalar(self):
        with pytest.raises(ValueError):
            gradient(zeros(G8, 3))

    def test_curl_is_symmetric(self):
        a = random_vector(G16, 6)
        b = random_vector(G16, 7)
        lhs, rhs = inner_product(curl(a), b), inner_product(a, curl(b))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


class TestLeray:
    def test_kills_gradients(self):
        rng = np.random.default_rng(8)
        phi = to_spectral(rng.standard_normal((1,) + G16.shape), G16)
        assert np.abs(leray_project(gradient(phi)).coeffs).max() < 1e-14

    def test_idempotent_and_solenoidal(self):
        p = leray_project(random_vector(G16, 9))
        assert np.abs(to_physical(divergence(p))).max() < 1e-12
        assert np.abs(leray_project(p).coeffs - p.coeffs).max() <= 1e-13

    def test_preserves_known_solenoidal_field(self):
        x1, x2, _ = G16.mesh()
        f = field(G16, [np.sin(x2), np.sin(x1), np.zeros(G16.shape)])
        assert np.abs(to_physical(divergence(f))).max() < 1e-13
        assert np.abs(leray_project(f).coeffs - f.coeffs).max() <= 1e-13

    def test_zero_mode_untouched(self):
        f = zeros(G8)
        f.coeffs[:, 0, 0, 0] = [1.0, 2.0, 3.0]
        np.testing.assert_array_equal(leray_project(f).coeffs[:, 0, 0, 0], [1.0, 2.0, 3.0])


class TestProducts:
    def test_cross_self_is_zero(self):
        f = random_vector(G16, 10)
        assert np.abs(multiply_physical(f, f, "cross").coeffs).max() < 1e-14

    def test_advecting_constant(self):
        u = random_vector(G16, 11)
        c = zeros(G16)
        c.coeffs[:, 0, 0, 0] = [1.0, -2.0, 0.5]
        assert np.abs(multiply_physical(u, c, "advective").coeffs).max() == 0

    def test_output_dealiased(self):
        f = random_vector(G16, 12)
        g = random_vector(G16, 13)
        out = multiply_physical(f, g, "dot")
        assert np.abs(out.coeffs[:, ~G16.dealias_mask]).max() == 0

    def test_sine_squared(self):
        x1 = G16.mesh()[0]
        s = to_spectral(np.sin(x1)[None], G16)
        out = multiply_physical(s, s)
        # sin^2 = 1/2 - cos(2x)/2
        assert out.coeffs[0, 0, 0, 0] == pytest.approx(0.5)
        assert out.coeffs[0, 2, 0, 0] == pytest.approx(-0.25)

    def test_mismatches(self):
        with pytest.raises(ValueError):
            multiply_physical(zeros(G8), zeros(G16))
        with pytest.raises(ValueError):
            multiply_physical(zeros(G8, 1), zeros(G8), "cross")
        with pytest.raises(ValueError):
            multiply_physical(zeros(G8), zeros(G8), "wedge")


class TestNorms:
    def test_constant_lp(self):
        c = 1.7
        f = to_spectral(np.full((1,) + G8.shape, c), G8)
        for p in (1, 2, 3.5, 4):
            assert lp_norm(f, p) == pytest.approx(c * (2 * math.pi) ** (3 / p), rel=1e-12)
        assert lp_norm(f, math.inf) == pytest.approx(c)

    def test_l4_of_sine(self):
        # int_0^{2pi} sin^4 = 3 pi / 4, other two axes contribute (2 pi)^2
        g = Grid(32)
        f = to_spectral(np.sin(g.mesh()[0])[None], g)
        exact = (3 * math.pi / 4 * (2 * math.pi) ** 2) ** 0.25
        assert lp_norm(f, 4) == pytest.approx(exact, rel=1e-12)

    def test_rejects_p_below_one(self):
        with pytest.raises(ValueError):
            lp_norm(zeros(G8), 0.5)

    def test_inner_product_identities(self):
        x1 = G16.mesh()[0]
        s = to_spectral(np.sin(x1)[None], G16)
        c = to_spectral(np.cos(x1)[None], G16)
        assert abs(inner_product(s, c)) < 1e-13
        f = random_vector(G16, 14)
        assert inner_product(f, f) == pytest.approx(l2_norm(f) ** 2, rel=1e-13)

    def test_vector_magnitude_is_euclidean(self):
        g = Grid(16)
        x1 = g.mesh()[0]
        f = field(g, [np.sin(x1), np.cos(x1), np.zeros(g.shape)])
        assert lp_norm(f, math.inf) == pytest.approx(1.0)


class TestResampling:
    def test_rescale_moves_modes(self):
        x1, x2, x3 = G16.mesh()
        f = to_spectral(np.sin(x1 + 2 * x3)[None], G16)
        out = rescale_coordinates(f, 2)
        np.testing.assert_allclose(to_physical(out)[0], np.sin(2 * x1 + 4 * x3), atol=1e-13)

    def test_rescale_rejects_band_overflow(self):
        x1 = G16.mesh()[0]
        f = to_spectral(np.sin(4 * x1)[None], G16)
        with pytest.raises(ValueError):
            rescale_coordinates(f, 2)

    def test_resample_round_trip(self):
        f = random_vector(G16, 15, band=4)
        up = resample(f, Grid(32))
        np.testing.assert_allclose(to_physical(up)[:, ::2, ::2, ::2], to_physical(f), atol=1e-13)
        np.testing.assert_allclose(resample(up, G16).coeffs, f.coeffs, atol=1e-16)

    def test_resample_needs_same_box(self):
        with pytest.raises(ValueError):
            resample(zeros(G8), Grid(16, 1.0))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_operators_are_linear(seed, a, b):
    f = random_vector(G8, seed)
    g = random_vector(G8, seed + 1)
    lhs = curl(f * a + g * b)
    rhs = curl(f) * a + curl(g) * b
    assert np.abs(lhs.coeffs - rhs.coeffs).max() <= 1e-12 * (1 + abs(a) + abs(b)) * np.abs(curl(f).coeffs).max()


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([4, 6, 8, 10]), dims=st.sampled_from([2, 3]))
def test_round_trip_property(seed, n, dims):
    g = Grid(n, 2 * math.pi, dims)
    x = np.random.default_rng(seed).standard_normal((3,) + g.shape)
    assert np.abs(to_physical(to_spectral(x, g)) - x).max() <= 1e-12 * np.abs(x).max()
