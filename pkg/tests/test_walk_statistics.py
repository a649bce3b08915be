"""
Unit tests for the WalkStatistics module.
"""

import tempfile
import unittest
from pathlib import Path

import numpy as np

from LatticeWalkEngine import ProbabilityGrid, iter_walk
from QuantumCoins import CoinKind
from TrapLattice import generate_traps
from WalkErrors import FitError, InsufficientDataError
from WalkStatistics import (
    SigmaSeries,
    decoherence_time,
    ensemble_sigma,
    kww_fit,
    kww_generate,
    local_slopes,
    loglog_slope,
    mean_survival,
    read_sigma_csv,
    sigma_of,
    sigma_series,
    write_sigma_csv,
)


def grid_from_sites(half_width: int, masses: dict) -> ProbabilityGrid:
    size = 2 * half_width + 1
    values = np.zeros((size, size))
    for (m, n), mass in masses.items():
        values[m + half_width, n + half_width] = mass
    return ProbabilityGrid(half_width, values, 1)


def make_series(sigma, coin="hadamard", density=0.1, config_index=None) -> SigmaSeries:
    sigma = np.asarray(sigma, dtype=np.float64)
    return SigmaSeries(
        times=np.arange(1, len(sigma) + 1),
        sigma=sigma,
        survivors=(~np.isnan(sigma)).astype(np.int64),
        coin=coin,
        density=density,
        config_index=config_index,
    )


FOUR_CORNERS = {(1, 1): 0.25, (1, -1): 0.25, (-1, 1): 0.25, (-1, -1): 0.25}


class TestSigmaOf(unittest.TestCase):

    def test_point_mass(self) -> None:
        self.assertEqual(sigma_of(grid_from_sites(3, {(0, 0): 1.0})), 0.0)

    def test_four_corners(self) -> None:
        self.assertAlmostEqual(sigma_of(grid_from_sites(3, FOUR_CORNERS)), np.sqrt(2.0), delta=1e-15)

    def test_raw_mode_scaled_by_survival(self) -> None:
        half = {site: mass / 2 for site, mass in FOUR_CORNERS.items()}
        grid = grid_from_sites(3, half)
        self.assertAlmostEqual(sigma_of(grid, "raw"), 1.0, delta=1e-15)
        self.assertAlmostEqual(sigma_of(grid, "conditional"), np.sqrt(2.0), delta=1e-15)

    def test_fully_absorbed(self) -> None:
        empty = grid_from_sites(2, {})
        self.assertIsNone(sigma_of(empty, "conditional"))
        self.assertEqual(sigma_of(empty, "raw"), 0.0)

    def test_translation_covariant(self) -> None:
        masses = {(0, 0): 0.2, (2, 1): 0.3, (-1, 2): 0.1, (1, -2): 0.15}
        shifted = {(m + 3, n - 2): p for (m, n), p in masses.items()}
        self.assertAlmostEqual(sigma_of(grid_from_sites(6, masses)), sigma_of(grid_from_sites(6, shifted)), delta=1e-12)

    def test_conditional_scale_invariant(self) -> None:
        masses = {(0, 0): 0.2, (2, 1): 0.3, (-1, 2): 0.1}
        scaled = {site: 0.37 * p for site, p in masses.items()}
        self.assertAlmostEqual(sigma_of(grid_from_sites(3, masses)), sigma_of(grid_from_sites(3, scaled)), delta=1e-12)

    def test_unknown_mode(self) -> None:
        with self.assertRaises(ValueError):
            sigma_of(grid_from_sites(1, {(0, 0): 1.0}), "median")


class TestSigmaSeries(unittest.TestCase):

    def test_absorbed_run_marks_absent_values(self) -> None:
        L = 3
        traps = generate_traps(L, 1.0, seed=0, config_index=0)
        series = sigma_series(iter_walk(CoinKind.GROVER, 2, traps), coin="grover", density=1.0)
        self.assertEqual(list(series.times), [1, 2])
        self.assertTrue(np.all(np.isnan(series.sigma)))
        self.assertEqual(list(series.survivors), [0, 0])


class TestEnsembleSigma(unittest.TestCase):

    def test_single_member(self) -> None:
        series = make_series([1.0, 2.5, 3.25], config_index=0)
        averaged = ensemble_sigma([series])
        np.testing.assert_array_equal(averaged.sigma, series.sigma)
        self.assertEqual(averaged.ensemble_size, 1)

    def test_constant_members(self) -> None:
        averaged = ensemble_sigma([make_series([2.0] * 5, config_index=0), make_series([4.0] * 5, config_index=1)])
        np.testing.assert_array_equal(averaged.sigma, [3.0] * 5)
        np.testing.assert_array_equal(averaged.survivors, [2] * 5)

    def test_absent_members_are_excluded(self) -> None:
        averaged = ensemble_sigma([
            make_series([1.0, 2.0, np.nan], config_index=0),
            make_series([3.0, np.nan, np.nan], config_index=1),
        ])
        self.assertEqual(averaged.sigma[0], 2.0)
        self.assertEqual(averaged.sigma[1], 2.0)
        self.assertTrue(np.isnan(averaged.sigma[2]))
        np.testing.assert_array_equal(averaged.survivors, [2, 1, 0])

    def test_permutation_invariant(self) -> None:
        rng = np.random.default_rng(21)
        members = [make_series(rng.uniform(0.1, 10.0, size=30), config_index=r) for r in range(50)]
        forward = ensemble_sigma(members)
        backward = ensemble_sigma(members[::-1])
        np.testing.assert_array_equal(forward.sigma, backward.sigma)

    def test_empty_ensemble(self) -> None:
        with self.assertRaises(InsufficientDataError):
            ensemble_sigma([])

    def test_metadata_mismatch(self) -> None:
        with self.assertRaises(ValueError):
            ensemble_sigma([make_series([1.0], density=0.1), make_series([1.0], density=0.2)])

    def test_mean_survival(self) -> None:
        np.testing.assert_array_equal(mean_survival([[1.0, 0.5], [1.0, 0.25]]), [1.0, 0.375])


class TestSlopes(unittest.TestCase):

    def test_exact_power_laws(self) -> None:
        t = np.arange(1, 101, dtype=float)
        self.assertAlmostEqual(loglog_slope(make_series(3.0 * t), (1, 100)), 1.0, delta=1e-9)
        self.assertAlmostEqual(loglog_slope(make_series(np.sqrt(2 * t)), (1, 100)), 0.5, delta=1e-9)
        self.assertAlmostEqual(loglog_slope(make_series(0.7 * t ** 0.5), (20, 80)), 0.5, delta=1e-9)

    def test_window_too_small(self) -> None:
        with self.assertRaises(InsufficientDataError):
            loglog_slope(make_series(np.arange(1, 11, dtype=float)), (2, 4))

    def test_nonpositive_sigma(self) -> None:
        sigma = np.arange(1, 21, dtype=float)
        sigma[10] = 0.0
        with self.assertRaises(InsufficientDataError):
            loglog_slope(make_series(sigma), (1, 20))

    def test_local_slopes_of_power_law(self) -> None:
        t = np.arange(1, 61, dtype=float)
        centers, slopes = local_slopes(make_series(t ** 0.5), 15)
        self.assertEqual(len(centers), 60 - 15 + 1)
        self.assertEqual(centers[0], 8)
        np.testing.assert_allclose(slopes, 0.5, atol=1e-9)


class TestDecoherenceTime(unittest.TestCase):

    def test_ballistic_series_never_decoheres(self) -> None:
        t = np.arange(1, 101, dtype=float)
        self.assertIsNone(decoherence_time(make_series(2.0 * t)))

    def test_known_break(self) -> None:
        t = np.arange(1, 101, dtype=float)
        sigma = np.where(t < 40, t, 40.0 * np.sqrt(t / 40.0))
        found = decoherence_time(make_series(sigma), window_width=15)
        self.assertIsNotNone(found)
        self.assertLessEqual(abs(found - 40), 15 / 2)

    def test_series_shorter_than_window(self) -> None:
        with self.assertRaises(InsufficientDataError):
            decoherence_time(make_series(np.arange(1, 10, dtype=float)), window_width=15)


class TestKwwFit(unittest.TestCase):

    def test_recovers_stretched_exponential(self) -> None:
        t = np.arange(1, 101, dtype=float)
        fit = kww_fit(kww_generate(t, 30.0, 0.6))
        self.assertAlmostEqual(fit.tau, 30.0, delta=1e-6)
        self.assertAlmostEqual(fit.beta, 0.6, delta=1e-6)
        self.assertLess(fit.residual, 1e-9)

    def test_pure_exponential(self) -> None:
        t = np.arange(1, 101, dtype=float)
        self.assertAlmostEqual(kww_fit(np.exp(-t / 12.0)).beta, 1.0, delta=1e-6)

    def test_parameter_round_trip(self) -> None:
        t = np.arange(1, 201, dtype=float)
        for tau in (5.0, 20.0, 75.0, 200.0):
            for beta in (0.2, 0.45, 0.7, 1.0):
                with self.subTest(tau=tau, beta=beta):
                    fit = kww_fit(kww_generate(t, tau, beta), t)
                    self.assertAlmostEqual(fit.tau, tau, delta=1e-6)
                    self.assertAlmostEqual(fit.beta, beta, delta=1e-6)

    def test_nothing_absorbed(self) -> None:
        with self.assertRaises(FitError):
            kww_fit(np.ones(50))

    def test_increasing_series_rejected(self) -> None:
        with self.assertRaises(FitError):
            kww_fit(np.linspace(0.5, 0.9, 20))

    def test_zero_survival_rejected(self) -> None:
        survival = kww_generate(np.arange(1, 21), 5.0, 0.8)
        survival[-1] = 0.0
        with self.assertRaises(FitError):
            kww_fit(survival)

    def test_too_few_points(self) -> None:
        with self.assertRaises(InsufficientDataError):
            kww_fit(np.array([1.0, 1.0, 0.9, 0.8]))


class TestSeriesEquality(unittest.TestCase):

    def test_values_are_compared(self) -> None:
        self.assertNotEqual(make_series([1.0, 2.0, 3.0]), make_series([1.0, 2.0, 3.5]))
        self.assertEqual(make_series([1.0, np.nan, 3.0]), make_series([1.0, np.nan, 3.0]))

    def test_metadata_is_compared(self) -> None:
        self.assertNotEqual(make_series([1.0, 2.0], coin="grover"), make_series([1.0, 2.0], coin="fourier"))


class TestSigmaCsv(unittest.TestCase):

    def test_format_and_read_back(self) -> None:
        series = make_series([1.5, np.nan, 1.0 / 3.0])
        with tempfile.TemporaryDirectory() as tmp:
            path = write_sigma_csv(series, Path(tmp) / "sigma.csv")
            lines = path.read_text().splitlines()
            self.assertEqual(lines[0], "t,sigma,survivors")
            self.assertEqual(lines[2], "2,,0")
            self.assertEqual(lines[3], "3,0.33333333333333331,1")
            restored = read_sigma_csv(path)
        np.testing.assert_array_equal(restored.sigma, series.sigma)
        np.testing.assert_array_equal(restored.survivors, series.survivors)


if __name__ == "__main__":
    unittest.main()
