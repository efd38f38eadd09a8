import math

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.integrate import quad
from scipy.special import gammaincc, ive
from scipy.stats import kstest, ncx2

from coexistApp.choices import Hypothesis, Method
from coexistApp.detection import (
    DetectionSetup,
    cond_cdf,
    lower_inc_gamma,
    marcum_q,
    min_exclusion_radius,
    roc_curve,
    spatial_pd,
    spatial_pfa,
    spatial_probabilities,
)
from coexistApp.simkit import simulate_test_statistic
from coexistApp.stochgeom import Deployment

DEFAULT_SETUP = DetectionSetup(10, 1e-7, 1e-9, 2e-9)
# interference comparable to noise at a few km
LOUD_SETUP = DetectionSetup(10, 1e-15, 1e-15, 3e-15)


class SetupTests(SimpleTestCase):
    def test_rejects_invalid_values(self):
        for kwargs in ({"n_samples": 0}, {"n_samples": 2.5}, {"noise_w": -1.0}):
            params = {"n_samples": 10, "p_tar": 1e-7, "noise_w": 1e-9, **kwargs}
            with self.subTest(**kwargs), self.assertRaises(ValueError):
                DetectionSetup(**params)

    def test_with_threshold(self):
        self.assertEqual(DEFAULT_SETUP.with_threshold(5e-9).p_th, 5e-9)
        self.assertEqual(DEFAULT_SETUP.p_th, 2e-9)


class SpecialFunctionTests(SimpleTestCase):
    def test_lower_inc_gamma_closed_forms(self):
        self.assertAlmostEqual(lower_inc_gamma(1, 2.0), 1.0 - math.exp(-2.0))
        self.assertAlmostEqual(lower_inc_gamma(2, 1.5), 1.0 - 2.5 * math.exp(-1.5))
        self.assertEqual(lower_inc_gamma(3, 0.0), 0.0)

    def test_lower_inc_gamma_rejects_negative(self):
        with self.assertRaises(ValueError):
            lower_inc_gamma(2, -1.0)

    def test_marcum_edges(self):
        self.assertAlmostEqual(marcum_q(4, 0.0, 3.0), float(gammaincc(4, 4.5)))
        self.assertEqual(marcum_q(4, 2.0, 0.0), 1.0)

    def test_marcum_matches_noncentral_chi_square(self):
        for n, a, b in ((1, 1.0, 1.5), (3, 2.0, 2.5), (10, 8.0, 9.0), (25, 40.0, 38.0)):
            with self.subTest(n=n, a=a, b=b):
                self.assertAlmostEqual(marcum_q(n, a, b), float(ncx2.sf(b ** 2, 2 * n, a ** 2)), places=7)

    def test_marcum_first_order_matches_bessel_integral(self):
        a, b = 2.0, 2.5
        # ive(0, a*x) = I0(a*x) * exp(-a*x)
        integral, _ = quad(lambda x: x * math.exp(-0.5 * (x - a) ** 2) * ive(0, a * x), b, math.inf)
        self.assertAlmostEqual(marcum_q(1, a, b), integral, places=8)

    def test_marcum_matches_simulation(self):
        rng = np.random.default_rng(17)
        draws = rng.noncentral_chisquare(6, 4.0, size=100_000)
        estimate = float(np.mean(draws > 6.25))
        stderr = math.sqrt(estimate * (1 - estimate) / draws.size)
        self.assertLess(abs(marcum_q(3, 2.0, 2.5) - estimate), 4 * stderr)

    def test_marcum_broadcasts(self):
        values = marcum_q(2, np.array([0.5, 1.0, 2.0]), 1.0)
        self.assertEqual(values.shape, (3,))
        self.assertTrue(np.all(np.diff(values) > 0))


class ConditionalTests(SimpleTestCase):
    def test_cdf_is_zero_at_zero_power(self):
        for hypothesis in Hypothesis:
            self.assertEqual(cond_cdf(DEFAULT_SETUP, 1e-9, hypothesis, 0.0), 0.0)

    def test_no_target_makes_hypotheses_equal(self):
        setup = DetectionSetup(10, 0.0, 1e-9)
        p = np.linspace(1e-10, 5e-9, 20)
        np.testing.assert_allclose(
            cond_cdf(setup, 1e-9, Hypothesis.H1, p), cond_cdf(setup, 1e-9, Hypothesis.H0, p)
        )

    def test_unknown_method_raises(self):
        with self.assertRaises(ValueError):
            cond_cdf(DEFAULT_SETUP, 0.0, Hypothesis.H0, 1e-9, "FFT")

    def test_clt_approaches_chi_square_for_long_windows(self):
        setup = DetectionSetup(1000, 1e-9, 1e-9)
        s = setup.noise_w
        spreads = {Hypothesis.H0: (s, s), Hypothesis.H1: (2e-9, math.sqrt(4e-18 - 1e-18))}
        for hypothesis, (mean, spread) in spreads.items():
            half_width = 6.0 * spread / math.sqrt(setup.n_samples)
            grid = np.linspace(mean - half_width, mean + half_width, 2001)
            gap = np.abs(
                cond_cdf(setup, 0.0, hypothesis, grid, Method.CLT) - cond_cdf(setup, 0.0, hypothesis, grid)
            )
            self.assertLess(float(gap.max()), 0.01)

    @tag("slow")
    def test_cdf_matches_simulated_windows(self):
        setup = DetectionSetup(10, 1e-9, 5e-10)
        rng = np.random.default_rng(23)
        for hypothesis in Hypothesis:
            with self.subTest(hypothesis=hypothesis):
                stats = simulate_test_statistic(setup, 5e-10, hypothesis, 200_000, rng)
                statistic = kstest(stats, lambda p: cond_cdf(setup, 5e-10, hypothesis, p)).statistic
                self.assertLess(statistic, 0.005)


class SpatialTests(SimpleTestCase):
    dep = Deployment(0.01, 5000)

    def test_zero_threshold_always_alarms(self):
        self.assertAlmostEqual(spatial_pfa(self.dep, DEFAULT_SETUP.with_threshold(0.0)), 1.0)
        self.assertAlmostEqual(spatial_pd(self.dep, DEFAULT_SETUP.with_threshold(0.0)), 1.0)

    def test_far_exclusion_reduces_to_noise_only(self):
        setup = DetectionSetup(10, 0.0, 1e-9, 1.5e-9)
        noise_only = float(gammaincc(10, 15.0))
        self.assertAlmostEqual(spatial_pfa(self.dep.replace(r_exc=1e6), setup), noise_only, places=6)

    def test_probabilities_fall_with_threshold(self):
        thresholds = np.geomspace(1e-9, 1e-6, 25)
        pd, pfa = spatial_probabilities(self.dep, DEFAULT_SETUP, thresholds)
        self.assertTrue(np.all(np.diff(pd) <= 1e-9))
        self.assertTrue(np.all(np.diff(pfa) <= 1e-9))

    def test_false_alarm_falls_with_exclusion_radius(self):
        pfa = [spatial_pfa(self.dep.replace(r_exc=r), LOUD_SETUP) for r in (5000.0, 10000.0, 20000.0)]
        self.assertGreater(pfa[0], pfa[1])
        self.assertGreater(pfa[1], pfa[2])

    def test_roc_starts_at_one_one(self):
        points = roc_curve(self.dep, DEFAULT_SETUP, [0.0, 1e-9, 1e-8, 1e-7])
        self.assertAlmostEqual(points[0].pfa, 1.0)
        self.assertAlmostEqual(points[0].pd, 1.0)
        self.assertEqual(points[0].method, "CHISQ")
        for earlier, later in zip(points, points[1:]):
            self.assertLessEqual(later.pd, earlier.pd)
            self.assertLessEqual(later.pfa, earlier.pfa)

    def test_roc_rejects_unsorted_thresholds(self):
        with self.assertRaises(ValueError):
            roc_curve(self.dep, DEFAULT_SETUP, [1e-8, 1e-9])
        with self.assertRaises(ValueError):
            roc_curve(self.dep, DEFAULT_SETUP, [])


class MinExclusionTests(SimpleTestCase):
    dep = Deployment(0.01, 5000)
    candidates = np.arange(0.0, 10001.0, 1000.0)

    def test_vacuous_targets_return_first_candidate(self):
        self.assertEqual(min_exclusion_radius(self.dep, DEFAULT_SETUP, 0.0, 1.0, self.candidates), 0.0)

    def test_unreachable_targets_return_none(self):
        result = min_exclusion_radius(
            self.dep, DEFAULT_SETUP, 0.9, 0.1, self.candidates, evaluate=lambda d: (0.5, 0.5)
        )
        self.assertIsNone(result)

    def test_monotone_search(self):
        def evaluate(d):
            return (1.0, 0.0) if d.r_exc >= 5000 else (0.0, 0.0)

        result = min_exclusion_radius(self.dep, DEFAULT_SETUP, 0.5, 0.5, self.candidates, evaluate=evaluate)
        self.assertEqual(result, 5000.0)

    def test_non_monotone_falls_back_to_scan(self):
        def evaluate(d):
            pd = 1.0 if d.r_exc in (3000.0, 10000.0) else 0.0
            pfa = 0.9 if d.r_exc == 8000.0 else 0.0
            return pd, pfa

        with self.assertLogs("coexistApp.detection", "WARNING"):
            result = min_exclusion_radius(self.dep, DEFAULT_SETUP, 0.5, 0.5, self.candidates, evaluate=evaluate)
        self.assertEqual(result, 3000.0)

    def test_rejects_bad_grids(self):
        with self.assertRaises(ValueError):
            min_exclusion_radius(self.dep, DEFAULT_SETUP, 0.5, 0.5, [])
        with self.assertRaises(ValueError):
            min_exclusion_radius(self.dep, DEFAULT_SETUP, 0.5, 0.5, [2000.0, 1000.0])

    def test_analytic_search_on_default_setup(self):
        result = min_exclusion_radius(self.dep, DEFAULT_SETUP, 0.5, 0.5, [2500.0, 5000.0, 10000.0])
        self.assertEqual(result, 2500.0)
