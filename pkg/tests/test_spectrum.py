import math

import numpy as np
import pytest

from ccjj import grids, model, spectrum


class TestSolve1D:
    def test_harmonic_limit_spacing(self):
        # cubic term zeroed: uniform spacing at the local plasma frequency
        scales = model.scales_for_ns(4.0, 1e-12)
        grid = grids.build_grid(scales, (-0.1, 0.0), 512)
        j = model.detune(scales.reference_bias, -0.05).j1
        e, _ = spectrum.solve_1d(j, scales, grid.axis1, 4, potential="harmonic")
        wp = model.plasma_frequency(j, scales)
        for spacing in np.diff(e):
            assert spacing == pytest.approx(wp, abs=1e-6)

    def test_cubic_softens_ladder(self, scales4, grid4):
        j = scales4.reference_bias
        e, _ = spectrum.solve_1d(j, scales4, grid4.axis1, 3)
        assert e[1] - e[0] > e[2] - e[1]

    def test_spacings_against_fine_grid_oracle(self, scales4, grid4):
        j = scales4.reference_bias
        e, _ = spectrum.solve_1d(j, scales4, grid4.axis1, 3)
        e_fine, _ = spectrum.solve_1d(j, scales4, grid4.with_resolution(512).axis1, 3)
        e_finer, _ = spectrum.solve_1d(j, scales4, grid4.with_resolution(1024).axis1, 3)
        # production resolution sits within the 4th-order error envelope ...
        assert np.abs(e - e_fine).max() < 5e-5
        # ... and the oracle itself is converged
        assert np.abs(e_fine - e_finer).max() < 1e-7

    def test_spacings_follow_cubic_perturbation_form(self, scales4, grid4):
        # E_{n+1} - E_n ~ wp (1 - 5 (n+1) / (36 Ns')); second-order result,
        # so allow the known higher-order enhancement at this depth.
        j = scales4.reference_bias
        e, _ = spectrum.solve_1d(j, scales4, grid4.axis1, 3)
        wp = model.plasma_frequency(j, scales4) / math.sqrt(1 + scales4.zeta)
        ns_eff = model.cubic_barrier_height(j, scales4) / wp
        for n, spacing in enumerate(np.diff(e)):
            predicted_drop = 5.0 * (n + 1) / (36.0 * ns_eff)
            actual_drop = 1.0 - spacing / wp
            assert actual_drop == pytest.approx(predicted_drop, rel=0.6)
            assert actual_drop > predicted_drop  # higher orders soften further

    def test_too_many_levels_rejected(self, scales4, grid4):
        j = model.detune(scales4.reference_bias, -0.1).j1  # ~3-level well
        with pytest.raises(spectrum.SpectrumError):
            spectrum.solve_1d(j, scales4, grid4.axis1, 12)

    def test_states_are_orthonormal(self, scales4, grid4):
        j = scales4.reference_bias
        _, v = spectrum.solve_1d(j, scales4, grid4.axis1, 3)
        h = grid4.d1
        gram = v.T @ v * h
        assert np.abs(gram - np.eye(3)).max() < 1e-8


class TestSolve2D:
    def test_ground_energy_matches_paper(self, slice_parked):
        assert slice_parked.energies[0] == pytest.approx(0.981, abs=0.005)

    def test_labels_at_parking_point(self, slice_parked):
        assert slice_parked.labels[0] == (0, 0)
        assert slice_parked.labels[1] == (1, 0)
        assert slice_parked.labels[2] == (0, 1)
        assert slice_parked.labels[4] == (1, 1)
        assert (slice_parked.label_overlaps[[0, 1, 2, 4]] > 0.95).all()

    def test_energies_sorted_and_states_orthonormal(self, slice_parked):
        e = slice_parked.energies
        assert (np.diff(e) >= 0).all()
        for i, a in enumerate(slice_parked.states):
            for j, b in enumerate(slice_parked.states):
                expected = 1.0 if i == j else 0.0
                assert abs(grids.inner(a, b) - expected) < 1e-8

    def test_eigen_residual(self, slice_parked, scales4):
        assert spectrum.eigen_residual(slice_parked, scales4) < 1e-6

    def test_deterministic(self, scales4, grid4, slice_parked):
        again = spectrum.solve_2d(-0.1, scales4, grid4, count=6)
        assert np.array_equal(again.energies, slice_parked.energies)
        for a, b in zip(again.states, slice_parked.states):
            assert np.abs(a.values - b.values).max() < 1e-10

    def test_zeta_zero_separability(self):
        # Minkowski-sum oracle: 2D spectrum = sorted sums of 1D spectra
        scales = model.scales_for_ns(4.0, 1e-12)
        grid = grids.build_grid(scales, (-0.07, 0.0), 128)
        slc = spectrum.solve_2d(-0.07, scales, grid, count=6)
        pair = model.detune(scales.reference_bias, -0.07)
        e1, _ = spectrum.solve_1d(pair.j1, scales, grid.axis1, 4)
        e2, _ = spectrum.solve_1d(pair.j2, scales, grid.axis2, 4)
        sums = np.sort(np.add.outer(e1, e2).ravel())[:6]
        assert np.abs(slc.energies - sums).max() < 1e-6

    def test_exchange_symmetry_under_detuning_flip(self, scales4, grid4):
        plus = spectrum.solve_2d(0.03, scales4, grid4, count=6)
        minus = spectrum.solve_2d(-0.03, scales4, grid4, count=6)
        assert np.abs(plus.energies - minus.energies).max() < 1e-9
        swapped = [(k, j) for j, k in minus.labels]
        assert plus.labels == swapped

    def test_three_state_sum_rule_at_zero(self, slice_zero, scales4):
        basis = spectrum.product_basis(0.0, scales4, slice_zero.states[0].grid)
        subspace = [basis.composite(0, 2), basis.composite(1, 1), basis.composite(2, 0)]
        for n in (3, 4, 5):
            weight = sum(
                abs(grids.inner(p, slice_zero.states[n])) ** 2 for p in subspace
            )
            assert weight > 0.98

    def test_coverage_error_on_tight_grid(self, scales4):
        tight = grids.Grid2D(64, 64, 1.40, 1.48, 1.40, 1.48)
        with pytest.raises(spectrum.CoverageError):
            spectrum.solve_2d(-0.1, scales4, tight, count=6)


class TestEntanglementMorphology:
    def test_first_excited_state(self, slice_parked, slice_zero):
        s_parked = grids.entanglement(slice_parked.states[1]).entropy
        s_zero = grids.entanglement(slice_zero.states[1]).entropy
        assert s_parked < 0.05
        assert s_zero == pytest.approx(1.0, abs=0.02)

    def test_entropy_rises_toward_symmetric_point(self, scales4, grid4, slice_parked, slice_zero):
        mid = spectrum.solve_2d(-0.05, scales4, grid4, count=6)
        s_mid = grids.entanglement(mid.states[1]).entropy
        s_lo = grids.entanglement(slice_parked.states[1]).entropy
        s_hi = grids.entanglement(slice_zero.states[1]).entropy
        assert s_lo < s_mid < s_hi

    def test_doublet_partners_equal_entropy(self, slice_zero):
        s1 = grids.entanglement(slice_zero.states[1]).entropy
        s2 = grids.entanglement(slice_zero.states[2]).entropy
        assert s1 == pytest.approx(s2, abs=1e-3)


class TestMixingAngle:
    def test_value_matches_paper(self, slice_zero, scales4):
        theta = spectrum.mixing_angle(slice_zero, scales=scales4)
        assert theta == pytest.approx(0.185, abs=0.02)

    def test_level_four_is_antisymmetric(self, slice_zero, scales4):
        basis = spectrum.product_basis(0.0, scales4, slice_zero.states[0].grid)
        p11 = basis.composite(1, 1)
        assert abs(grids.inner(p11, slice_zero.states[4])) < 0.05

    def test_requires_symmetric_point(self, slice_parked):
        with pytest.raises(model.ParameterError):
            spectrum.mixing_angle(slice_parked)


class TestSweep:
    def test_tracks_are_continuous(self, scales4, grid4):
        track = spectrum.sweep(
            np.linspace(-0.05, -0.025, 5), scales4, grid4, count=6
        )
        assert track.min_successive_overlap > 0.9
        assert track.energies.shape == (5, 6)
        assert (np.diff(track.energies[:, 0]) != 0).all()

    def test_empty_sweep_rejected(self, scales4, grid4):
        with pytest.raises(model.ParameterError):
            spectrum.sweep([], scales4, grid4)


class TestAvoidedCrossings:
    def test_doublet_crossing_sits_at_zero(self, scales4, grid4):
        eps_star, gap = spectrum.find_avoided_crossing(
            scales4, grid4, 1, 2, (-0.02, 0.02), xtol=5e-4
        )
        assert abs(eps_star) < 1e-3
        assert gap == pytest.approx(0.00946, abs=0.0005)

    def test_45_crossing_location(self, crossing45, scales4):
        eps_star, gap = crossing45
        assert eps_star == pytest.approx(-0.036, abs=0.004)
        # perturbative cross-check
        pert = spectrum.perturbative_eps(scales4.level_number)[0]
        assert abs(eps_star - pert) < 0.25 * abs(pert)

    def test_no_interior_minimum_raises(self, scales4, grid4):
        with pytest.raises(spectrum.SpectrumError):
            spectrum.find_avoided_crossing(
                scales4, grid4, 4, 5, (-0.095, -0.075), xtol=2e-3
            )

    def test_doublet_gap_linear_in_zeta(self, grid4):
        # first-order degenerate perturbation theory: gap at eps=0 ~ zeta
        gaps = {}
        for zeta in (0.005, 0.01, 0.02):
            scales = model.scales_for_ns(4.0, zeta)
            grid = grids.build_grid(scales, (-0.1, 0.0), 128)
            slc = spectrum.solve_2d(0.0, scales, grid, count=3)
            gaps[zeta] = float(slc.energies[2] - slc.energies[1])
        assert gaps[0.01] / gaps[0.005] == pytest.approx(2.0, rel=0.1)
        assert gaps[0.02] / gaps[0.01] == pytest.approx(2.0, rel=0.1)


class TestClosedForms:
    def test_perturbative_eps_for_four_levels(self):
        lo, hi = spectrum.perturbative_eps(4.0)
        assert lo == pytest.approx(-0.0347, abs=2e-4)
        assert hi == -lo

    def test_perturbative_eps_direct_evaluation(self):
        lo, hi = spectrum.perturbative_eps(5.16)
        assert hi == pytest.approx(5.0 / (36.0 * 5.16), rel=1e-12)

    def test_perturbative_eps_vanishes_for_deep_wells(self):
        assert spectrum.perturbative_eps(1e9)[1] < 1e-9

    def test_tunneling_scale(self):
        assert spectrum.tunneling_scale(4.0) == pytest.approx(math.exp(-28.8), rel=1e-12)
        assert spectrum.tunneling_scale(4.0) == pytest.approx(3.1e-13, rel=0.05)

    def test_tunneling_scale_monotone(self):
        assert spectrum.tunneling_scale(5.0) < spectrum.tunneling_scale(4.0)
        ratio = spectrum.tunneling_scale(4.0) / spectrum.tunneling_scale(5.0)
        assert ratio == pytest.approx(math.exp(36.0 / 5.0), rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(model.ParameterError):
            spectrum.perturbative_eps(0.0)
        with pytest.raises(model.ParameterError):
            spectrum.tunneling_scale(-1.0)
