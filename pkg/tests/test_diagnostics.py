"""Tests for the sufficiency statistics, KL routes, and rate sweeps."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from gmequiv.diagnostics import (
    DEFAULT_N_GRID,
    STATISTICS,
    band_split_decomposition,
    band_terms_statistic,
    class_extremal_family,
    discretization_statistic,
    fixed_family,
    kl_chain,
    kl_dense,
    kl_sequential,
    projection_statistic,
    random_family,
    rate_sweep,
    single_frequency_family,
    transformation_discrepancy,
)
from gmequiv.errors import KernelDegenerate, SingularCovariance
from gmequiv.fourier import ClassSpec, FourierFunction, sample_ellipsoid
from gmequiv.kernels import preset
from gmequiv.rkhs import projection_distance

COS = FourierFunction.harmonic(1)
KERNELS = ("bm", "ou", "slepian")


def _kernel(name):
    return preset(name, 1.0) if name == "ou" else preset(name)


def _slope(ns, values):
    return float(np.polyfit(np.log10(ns), np.log10(values), 1)[0])


class TestDiscretizationStatistic:
    def test_against_quadrature_oracle(self):
        """Rebuild the statistic from scratch: point values from math.cos,
        cell integrals from scipy.quad, clock increments from the closed
        forms. No shared code path with the implementation."""
        n = 8
        for name in KERNELS:
            k = _kernel(name)
            total = 0.0
            for i in range(1, n + 1):
                t = i / n
                cell_avg = n * quad(lambda x: math.cos(2 * math.pi * x),
                                    (i - 1) / n, t, epsabs=1e-14)[0]
                d = math.cos(2 * math.pi * t) - cell_avg
                dq = float(k.q(t)) - float(k.q((i - 1) / n))
                total += d * d / (float(k.v(t)) ** 2 * dq)
            oracle = total / n
            value = discretization_statistic(k, COS, n)
            assert math.isclose(value, oracle, rel_tol=1e-10), name

    def test_constant_signal_is_exactly_zero(self):
        """Constant f has identical point values and cell averages, so the
        statistic is 0.0 exactly (not merely small) for every preset.
        Dyadic amplitudes and power-of-two n keep every knot and every
        cell boundary exactly representable."""
        for amplitude in (1.0, 0.5, -2.25):
            f = FourierFunction.harmonic(0, amplitude)
            for name in ("bm", "ou", "bridge", "slepian"):
                k = _kernel(name)
                assert discretization_statistic(k, f, 16) == 0.0, (name, amplitude)

    def test_single_frequency_decay_rate(self):
        """Under bm with f = cos(2 pi x), the statistic behaves like
        pi^2/(2n): slope -1 on a log-log grid, constant pinned at n = 512."""
        ns = (32, 64, 128, 256, 512)
        values = [discretization_statistic(preset("bm"), COS, n) for n in ns]
        slope = _slope(ns, values)
        assert -1.05 <= slope <= -0.95
        assert math.isclose(values[-1], math.pi ** 2 / (2 * 512), rel_tol=1e-3)


class TestKlRoutes:
    def test_chain_is_half_the_statistic(self):
        k = preset("ou", 1.0)
        assert kl_chain(k, COS, 8) == 0.5 * discretization_statistic(k, COS, 8)

    def test_sequential_equals_dense_for_every_kernel(self):
        """The conditional factorization with the feedback term is an exact
        rewriting of the joint Gaussian KL, whatever the kernel."""
        f2 = sample_ellipsoid(ClassSpec.sobolev(2.0, 1.0), K=6, seed=7)
        for name in ("bm", "slepian"):
            k = _kernel(name)
            for f in (COS, f2):
                for n in range(2, 9):
                    seq = kl_sequential(k, f, n)
                    dense = kl_dense(k, f, n)
                    assert math.isclose(seq, dense, rel_tol=1e-12), (name, n)
        for L in (0.3, 1.0):
            k = preset("ou", L)
            for n in range(2, 9):
                assert math.isclose(kl_sequential(k, COS, n), kl_dense(k, COS, n),
                                    rel_tol=1e-12), (L, n)

    def test_chain_equals_dense_only_for_constant_v(self):
        """With v constant (bm) there is no feedback and the chain form is
        exact; with varying v it is a genuinely different number. Guard
        both directions so the gap stays visible."""
        for n in range(2, 9):
            assert abs(kl_chain(preset("bm"), COS, n)
                       - kl_dense(preset("bm"), COS, n)) < 1e-14
        assert abs(kl_chain(preset("ou", 1.0), COS, 4)
                   - kl_dense(preset("ou", 1.0), COS, 4)) > 1e-3
        assert abs(kl_chain(preset("slepian"), COS, 4)
                   - kl_dense(preset("slepian"), COS, 4)) > 1e-3

    def test_dense_rejects_singular_design(self):
        with pytest.raises(SingularCovariance):
            kl_dense(preset("bridge"), COS, 4)

    def test_nonnegative(self):
        for name in KERNELS:
            k = _kernel(name)
            assert kl_dense(k, COS, 6) >= 0.0
            assert kl_chain(k, COS, 6) >= 0.0


class TestProjectionStatistic:
    def test_is_sqrt_of_scaled_distance(self):
        k = preset("slepian")
        expected = math.sqrt(8 * projection_distance(k, COS, 8))
        assert math.isclose(projection_statistic(k, COS, 8), expected, rel_tol=1e-12)


class TestBandDecomposition:
    def test_band_limited_function_has_no_tail(self):
        """Every frequency of f below the cutoff: the tail sums vanish and
        the low-band gaps are the whole story."""
        f = FourierFunction.from_coeffs({0: 0.3, 1: 0.2 - 0.1j, 3: 0.05})
        dec = band_split_decomposition(f, 8)
        assert dec.b_sum == 0.0 and dec.c_sum == 0.0
        assert math.isclose(dec.a_sum, dec.total_gap_sq, rel_tol=1e-12)
        assert dec.bound_holds

    def test_aliased_frequency_anchor(self):
        """cos(2 pi n x) equals 1 at every knot and averages to 0 over every
        cell, so each gap is exactly 1 and the total is n."""
        n = 16
        dec = band_split_decomposition(FourierFunction.harmonic(n), n)
        assert math.isclose(dec.total_gap_sq, float(n), rel_tol=0, abs_tol=1e-10)

    def test_gaps_invariant_under_null_perturbation(self):
        """Adding a combination whose knot values and cell averages both
        vanish cannot change the gaps, though it reshuffles the three
        band sums."""
        n = 8
        f = sample_ellipsoid(ClassSpec.sobolev(1.0, 1.0), K=6, seed=1)
        h = FourierFunction.from_coeffs({n: 1.0, -n: 1.0, 2 * n: -1.0, -2 * n: -1.0})
        before = band_split_decomposition(f, n)
        after = band_split_decomposition(f.plus(h), n)
        assert math.isclose(after.total_gap_sq, before.total_gap_sq,
                            rel_tol=1e-10, abs_tol=1e-12)
        assert after.b_sum != before.b_sum

    def test_parseval_residual_small_on_random_functions(self):
        for seed in range(4):
            for n in (4, 16, 64):
                f = sample_ellipsoid(ClassSpec.sobolev(1.0, 1.0), K=3 * n, seed=seed)
                dec = band_split_decomposition(f, n)
                assert dec.parseval_residual <= 1e-10, (seed, n)
                assert dec.bound_holds, (seed, n)

    def test_statistic_is_bound_total(self):
        f = sample_ellipsoid(ClassSpec.sobolev(1.0, 1.0), K=24, seed=2)
        dec = band_split_decomposition(f, 8)
        assert band_terms_statistic(preset("bm"), f, 8) == dec.bound_total


class TestTransformationDiscrepancy:
    def test_zero_signal_under_bm_is_exactly_zero(self):
        """bm has mu = 0 under f = 0 and sigma^2 = 1 exactly at dyadic n."""
        assert transformation_discrepancy(preset("bm"), FourierFunction.zero(), 16) == 0.0

    def test_decreases_for_smooth_signal(self):
        k = preset("ou", 1.0)
        values = [transformation_discrepancy(k, COS, n) for n in (16, 32, 64, 128, 256)]
        assert all(v > 0 for v in values)
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_bm_cosine_rate(self):
        ns = (32, 64, 128, 256, 512)
        values = [transformation_discrepancy(preset("bm"), COS, n) for n in ns]
        slope = _slope(ns, values)
        assert -1.3 <= slope <= -0.7

    def test_pinned_kernel_rejected(self):
        with pytest.raises(KernelDegenerate):
            transformation_discrepancy(preset("bridge"), COS, 8)


class TestRateSweep:
    def test_registry_contents(self):
        assert set(STATISTICS) == {
            "discretization", "kl", "projection", "transformation", "band_terms",
        }
        with pytest.raises(KeyError):
            rate_sweep("entropy", preset("bm"), single_frequency_family())

    def test_single_frequency_discretization_slope(self):
        report = rate_sweep("discretization", preset("bm"), single_frequency_family(),
                            n_grid=DEFAULT_N_GRID)
        assert report.slope is not None
        assert abs(report.slope + 1.0) < 0.05
        assert report.fit_ns == DEFAULT_N_GRID[len(DEFAULT_N_GRID) // 2:]

    def test_gate_modes(self):
        family = single_frequency_family()
        k = preset("bm")
        hit = rate_sweep("discretization", k, family, n_grid=(32, 64, 128),
                         target=-1.0, margin=0.3)
        miss = rate_sweep("discretization", k, family, n_grid=(32, 64, 128),
                          target=-2.0, margin=0.3)
        upper = rate_sweep("discretization", k, family, n_grid=(32, 64, 128),
                           target=-0.5, margin=0.3, mode="upper")
        assert hit.passed is True
        assert miss.passed is False
        assert upper.passed is True
        assert rate_sweep("discretization", k, family,
                          n_grid=(32, 64)).passed is None

    def test_family_maximum(self):
        k = preset("bm")
        f1, f2 = FourierFunction.harmonic(1), FourierFunction.harmonic(3)
        family = fixed_family("pair", [f1, f2])
        report = rate_sweep("discretization", k, family, n_grid=(16, 32))
        for n, value in zip(report.n_values, report.values):
            expected = max(discretization_statistic(k, f1, n),
                           discretization_statistic(k, f2, n))
            assert value == expected

    def test_degenerate_when_every_member_fails(self):
        """A statistic that raises for the kernel yields nan maxima, an
        empty fit, and a failing gate rather than a crash."""
        report = rate_sweep("transformation", preset("bridge"),
                            single_frequency_family(), n_grid=(8, 16), target=-1.0)
        assert report.degenerate
        assert report.passed is False
        assert all(math.isnan(v) for v in report.values)
        assert "degenerate" in "\n".join(report.lines())

    def test_zero_values_are_excluded(self):
        family = fixed_family("flat", [FourierFunction.harmonic(0, 1.0)])
        report = rate_sweep("discretization", preset("bm"), family, n_grid=(16, 32))
        assert report.excluded == (16, 32)
        assert report.degenerate

    def test_thread_count_does_not_change_results(self):
        family = single_frequency_family()
        a = rate_sweep("kl", preset("ou", 1.0), family, n_grid=(8, 16, 32),
                       max_workers=1)
        b = rate_sweep("kl", preset("ou", 1.0), family, n_grid=(8, 16, 32),
                       max_workers=4)
        assert a.values == b.values
        assert a.slope == b.slope

    def test_extremal_family_tracks_class_rate(self):
        """For a Sobolev ball with beta = 0.75 the worst member aliases at
        k = n and the family maximum decays like n^{1-2 beta} = n^{-1/2}."""
        spec = ClassSpec.sobolev(0.75, 1.0)
        report = rate_sweep("discretization", preset("bm"),
                            class_extremal_family(spec, seed=0),
                            n_grid=(16, 32, 64, 128))
        assert report.slope is not None
        assert -0.7 <= report.slope <= -0.3

    def test_random_family_is_seed_stable(self):
        spec = ClassSpec.sobolev(1.0, 1.0)
        fam = random_family(spec, seed=3, count=2)
        ids_a = [f.content_id() for f in fam.members(8)]
        ids_b = [f.content_id() for f in fam.members(8)]
        assert ids_a == ids_b
