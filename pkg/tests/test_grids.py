import math

import numpy as np
import pytest

from ccjj import grids, model


@pytest.fixture(scope="module")
def scales():
    return model.scales_for_ns(4.0, 0.01)


@pytest.fixture(scope="module")
def grid(scales):
    return grids.build_grid(scales, (-0.1, 0.0), 128)


def gaussian_1d(axis, center, width):
    g = np.exp(-((axis - center) ** 2) / (4 * width**2))
    return g / np.linalg.norm(g)


def packet(grid, c1=None, c2=None, w=0.05, k1=0.0, k2=0.0):
    ax1, ax2 = grid.axis1, grid.axis2
    c1 = c1 if c1 is not None else ax1.mean()
    c2 = c2 if c2 is not None else ax2.mean()
    f = gaussian_1d(ax1, c1, w) * np.exp(1j * k1 * ax1)
    g = gaussian_1d(ax2, c2, w) * np.exp(1j * k2 * ax2)
    psi = grids.Wavefunction2D(grid, np.outer(f, g))
    return psi.normalized()


class TestBuildGrid:
    def test_coverage_over_eps_range(self, scales, grid):
        # oracle: arcsin minima and cubic barrier tops at sampled detunings
        for eps in np.linspace(-0.1, 0.0, 11):
            assert grids.covers(grid, scales, eps)

    def test_contains_wells_and_barriers(self, scales, grid):
        pair = model.detune(scales.reference_bias, -0.05)
        gm1 = model.well_minimum(pair.j1)
        gb1 = gm1 + model.cubic_barrier_offset(pair.j1)
        assert grid.gamma1_min < gm1 - 4 * model.ground_width(pair.j1, scales)
        assert grid.gamma1_max > gb1

    def test_symmetric_range_swaps_axes(self, scales):
        g = grids.build_grid(scales, (-0.05, 0.05), 128)
        assert g.gamma1_min == pytest.approx(g.gamma2_min, rel=1e-12)
        assert g.gamma1_max == pytest.approx(g.gamma2_max, rel=1e-12)

    def test_resolution_leaves_ranges_fixed(self, scales, grid):
        g2 = grids.build_grid(scales, (-0.1, 0.0), 256)
        assert g2.n1 == 256
        assert g2.gamma1_min == grid.gamma1_min
        assert g2.gamma1_max == grid.gamma1_max

    def test_rejects_low_resolution(self, scales):
        with pytest.raises(grids.GridError):
            grids.build_grid(scales, (-0.1, 0.0), 32)
        with pytest.raises(grids.GridError):
            grids.build_grid(scales, (-0.1, 0.0), 100)  # not a power of two


class TestInner:
    def test_self_inner_is_norm(self, grid):
        psi = packet(grid)
        v = grids.inner(psi, psi)
        assert v.imag == pytest.approx(0.0, abs=1e-14)
        assert v.real == pytest.approx(1.0, rel=1e-12)

    def test_sesquilinear(self, grid):
        psi = packet(grid)
        a = 0.3 - 1.7j
        scaled = grids.Wavefunction2D(grid, a * psi.values)
        assert grids.inner(scaled, psi) == pytest.approx(np.conj(a), rel=1e-12)
        assert grids.inner(psi, scaled) == pytest.approx(a, rel=1e-12)

    def test_conjugate_symmetry(self, grid):
        a = packet(grid, k1=3.0)
        b = packet(grid, k2=-2.0)
        assert grids.inner(a, b) == pytest.approx(np.conj(grids.inner(b, a)), rel=1e-12)

    def test_grid_mismatch(self, scales, grid):
        other = grids.build_grid(scales, (-0.05, 0.0), 128)
        with pytest.raises(grids.GridError):
            grids.inner(packet(grid), packet(other))


class TestTransforms:
    def test_round_trip(self, grid):
        psi = packet(grid, k1=5.0, k2=-3.0)
        back = grids.from_momentum(grid, grids.to_momentum(psi))
        assert np.abs(back.values - psi.values).max() < 1e-12

    def test_parseval(self, grid):
        psi = packet(grid, k1=5.0)
        phi = grids.to_momentum(psi)
        assert np.sum(np.abs(phi) ** 2) == pytest.approx(
            np.sum(np.abs(psi.values) ** 2), rel=1e-12
        )

    def test_constant_field_is_zero_mode(self, grid):
        const = grids.Wavefunction2D(
            grid, np.ones((grid.n1, grid.n2), dtype=complex)
        )
        phi = grids.to_momentum(const)
        mag = np.abs(phi)
        assert mag[0, 0] == pytest.approx(math.sqrt(grid.n1 * grid.n2), rel=1e-12)
        mag[0, 0] = 0.0
        assert mag.max() < 1e-10

    def test_plane_wave_single_mode(self, grid):
        m = 5
        k = grid.k1[m]
        wave = np.exp(1j * k * grid.axis1)[:, None] * np.ones(grid.n2)
        phi = grids.to_momentum(grids.Wavefunction2D(grid, wave))
        mag = np.abs(phi)
        assert mag[m, 0] == pytest.approx(math.sqrt(grid.n1 * grid.n2), rel=1e-12)
        mag[m, 0] = 0.0
        assert mag.max() < 1e-9


class TestEntanglement:
    def test_product_state_zero_entropy(self, grid):
        rep = grids.entanglement(packet(grid, k1=2.0, k2=-1.0))
        assert rep.entropy == pytest.approx(0.0, abs=1e-10)

    def test_bell_like_state_one_ebit(self, grid):
        ax1, ax2 = grid.axis1, grid.axis2
        c1, c2 = ax1.mean(), ax2.mean()
        f0 = gaussian_1d(ax1, c1 - 0.15, 0.03)
        f1 = gaussian_1d(ax1, c1 + 0.15, 0.03)
        g0 = gaussian_1d(ax2, c2 - 0.15, 0.03)
        g1 = gaussian_1d(ax2, c2 + 0.15, 0.03)
        bell = (np.outer(f0, g1) + np.outer(f1, g0)) / math.sqrt(2)
        rep = grids.entanglement(grids.Wavefunction2D(grid, bell).normalized())
        assert rep.entropy == pytest.approx(1.0, abs=1e-8)

    def test_schmidt_sum_rule(self, grid):
        psi = packet(grid)
        psi.values *= 0.7  # norm below one
        rep = grids.entanglement(psi)
        assert np.sum(rep.schmidt_coefficients**2) == pytest.approx(
            psi.norm_sq(), rel=1e-10
        )
        assert np.all(np.diff(rep.schmidt_coefficients) <= 1e-15)

    def test_local_phase_invariance(self, grid):
        ax1, ax2 = grid.axis1, grid.axis2
        f0 = gaussian_1d(ax1, ax1.mean() - 0.1, 0.04)
        f1 = gaussian_1d(ax1, ax1.mean() + 0.1, 0.04)
        g0 = gaussian_1d(ax2, ax2.mean() - 0.1, 0.04)
        g1 = gaussian_1d(ax2, ax2.mean() + 0.1, 0.04)
        state = 0.8 * np.outer(f0, g0) + 0.6 * np.outer(f1, g1)
        psi = grids.Wavefunction2D(grid, state).normalized()
        s0 = grids.entanglement(psi).entropy
        rot = psi.values * np.exp(1j * 0.8 * ax1)[:, None]
        rot = rot * np.exp(-1j * 1.9 * ax2)[None, :]
        s1 = grids.entanglement(grids.Wavefunction2D(grid, rot)).entropy
        assert abs(s0 - s1) < 1e-10

    def test_party_symmetry(self, grid):
        ax1, ax2 = grid.axis1, grid.axis2
        f0 = gaussian_1d(ax1, ax1.mean() - 0.1, 0.04)
        g0 = gaussian_1d(ax2, ax2.mean() + 0.05, 0.06)
        g1 = gaussian_1d(ax2, ax2.mean() - 0.12, 0.03)
        state = 0.9 * np.outer(f0, g0) + 0.45 * np.outer(f0, g1)
        sym_grid = grids.Grid2D(
            grid.n1, grid.n1, grid.gamma1_min, grid.gamma1_max,
            grid.gamma1_min, grid.gamma1_max,
        )
        psi = grids.Wavefunction2D(sym_grid, state).normalized()
        psi_t = grids.Wavefunction2D(sym_grid, psi.values.T.copy())
        assert grids.entanglement(psi).entropy == pytest.approx(
            grids.entanglement(psi_t).entropy, abs=1e-12
        )

    def test_zero_state_rejected(self, grid):
        zero = grids.Wavefunction2D(grid, np.zeros((grid.n1, grid.n2)))
        with pytest.raises(grids.GridError):
            grids.entanglement(zero)

    def test_entropy_bounded_by_log_dim(self, grid):
        rng = np.random.default_rng(7)
        vals = rng.normal(size=(grid.n1, grid.n2)) + 1j * rng.normal(
            size=(grid.n1, grid.n2)
        )
        rep = grids.entanglement(grids.Wavefunction2D(grid, vals).normalized())
        assert 0.0 <= rep.entropy <= math.log2(grid.n1)


class TestSnapshots:
    def test_round_trip(self, grid, tmp_path):
        psi = packet(grid, k1=4.0)
        path = tmp_path / "snap.bin"
        grids.save_snapshot(psi, path, time=12.5)
        loaded, t = grids.load_snapshot(path)
        assert t == 12.5
        assert loaded.grid == grid
        # complex64 storage: single-precision round trip
        assert np.abs(loaded.values - psi.values).max() < 1e-6
