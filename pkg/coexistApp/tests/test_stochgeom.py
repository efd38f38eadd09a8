import math

import numpy as np
from django.test import SimpleTestCase, tag

from coexistApp.exceptions import RegimeWarning
from coexistApp.stochgeom import (
    Deployment,
    PlanarPoint,
    aaecc_radius,
    check_regime,
    circumradius_cdf,
    circumradius_mean,
    circumradius_pdf,
    circumradius_rule,
    circumradius_samples,
    circumradius_truncation_residual,
    circumradius_upper,
    dbm_to_watts,
    linear_to_db,
    pathloss_db,
    pathloss_gain,
    sample_ppp_polar,
    sample_ppp_sector,
    uma_intercept_db,
    watts_to_dbm,
    zeta_k,
)


class DeploymentTests(SimpleTestCase):
    def test_density_is_per_square_metre(self):
        self.assertAlmostEqual(Deployment(0.01, 5000).density, 1e-8)

    def test_rejects_invalid_parameters(self):
        for kwargs in ({"lambda_bs": 0.0}, {"r_exc": -1.0}, {"alpha": 2.0}, {"k_users": 0}):
            params = {"lambda_bs": 0.01, "r_exc": 5000.0, **kwargs}
            with self.subTest(**kwargs), self.assertRaises(ValueError):
                Deployment(**params)

    def test_default_intercept_is_uma_los(self):
        dep = Deployment(0.01, 5000)
        self.assertAlmostEqual(uma_intercept_db(dep), 15.391, places=3)
        self.assertAlmostEqual(float(linear_to_db(dep.beta0)), -15.391, places=3)

    def test_pl_ref_overrides_intercept(self):
        self.assertEqual(Deployment(0.01, 5000, pl_ref=1e-3).beta0, 1e-3)

    def test_equal_heights_have_no_uma_intercept(self):
        dep = Deployment(0.01, 5000, h_bs=20, h_rad=20)
        with self.assertRaises(ValueError):
            dep.beta0

    def test_pathloss_follows_power_law(self):
        dep = Deployment(0.01, 5000, pl_ref=1.0)
        self.assertAlmostEqual(pathloss_gain(10.0, dep), 1e-4)
        self.assertAlmostEqual(pathloss_gain(1000.0, dep) / pathloss_gain(2000.0, dep), 16.0)

    def test_pathloss_db_slope(self):
        dep = Deployment(0.01, 5000)
        self.assertAlmostEqual(pathloss_db(2000.0, dep) - pathloss_db(1000.0, dep), 40.0 * math.log10(2.0))
        self.assertAlmostEqual(pathloss_db(1.0, dep), uma_intercept_db(dep))
        with self.assertRaises(ValueError):
            pathloss_db(0.0, dep)

    def test_in_regime_boundary(self):
        self.assertTrue(Deployment(0.01, 2500).in_regime())
        self.assertFalse(Deployment(0.01, 2499).in_regime())

    def test_replace_keeps_other_fields(self):
        dep = Deployment(0.01, 5000).replace(r_exc=9000)
        self.assertEqual(dep.r_exc, 9000)
        self.assertEqual(dep.lambda_bs, 0.01)

    def test_regime_check_warns_close_to_radar(self):
        dep = Deployment(0.01, 1000)
        with self.assertLogs("coexistApp.stochgeom", "WARNING"), self.assertWarns(RegimeWarning):
            self.assertFalse(check_regime(dep, "test"))
        self.assertTrue(check_regime(Deployment(0.01, 5000), "test"))


class UnitTests(SimpleTestCase):
    def test_dbm_conversions(self):
        self.assertAlmostEqual(float(watts_to_dbm(1.0)), 30.0)
        self.assertAlmostEqual(float(dbm_to_watts(0.0)), 1e-3)

    def test_aaecc_disk_holds_one_bs_on_average(self):
        density = 3e-7
        self.assertAlmostEqual(math.pi * aaecc_radius(density) ** 2 * density, 1.0)


class SamplingTests(SimpleTestCase):
    def test_points_stay_in_sector(self):
        rng = np.random.default_rng(1)
        r, theta = sample_ppp_polar(1e-6, 1000.0, 5000.0, -1.0, 1.0, rng)
        self.assertTrue(np.all((r >= 1000.0) & (r <= 5000.0)))
        self.assertTrue(np.all((theta >= -1.0) & (theta <= 1.0)))

    def test_count_matches_intensity(self):
        rng = np.random.default_rng(2)
        mean = 1e-6 * 0.5 * math.pi * (5000.0 ** 2 - 1000.0 ** 2)
        counts = [sample_ppp_polar(1e-6, 1000.0, 5000.0, -0.5 * math.pi, 0.5 * math.pi, rng)[0].size
                  for _ in range(2000)]
        self.assertLess(abs(np.mean(counts) - mean), 4.0 * math.sqrt(mean / 2000))

    def test_sector_returns_planar_points(self):
        points = sample_ppp_sector(1e-5, 0.0, 1000.0, -0.5, 0.5, np.random.default_rng(3))
        self.assertTrue(all(isinstance(p, PlanarPoint) for p in points))

    def test_rejects_inverted_bounds(self):
        with self.assertRaises(ValueError):
            sample_ppp_polar(1e-6, 5000.0, 1000.0, -1.0, 1.0, np.random.default_rng(0))


class CircumradiusTests(SimpleTestCase):
    density = 1e-8

    def test_cdf_runs_from_zero_to_one(self):
        r = np.linspace(0.0, circumradius_upper(self.density), 400)
        cdf = circumradius_cdf(self.density, r)
        self.assertAlmostEqual(float(cdf[0]), 0.0)
        self.assertAlmostEqual(float(cdf[-1]), 1.0, places=3)

    def test_pdf_is_nonnegative_and_normalised(self):
        _, weights = circumradius_rule(self.density)
        self.assertAlmostEqual(float(weights.sum()), 1.0, places=2)
        r = np.linspace(0.0, circumradius_upper(self.density), 200)
        self.assertTrue(np.all(circumradius_pdf(self.density, r) >= 0))

    def test_mean_exceeds_aaecc_radius(self):
        # the circumcircle contains the whole cell
        self.assertGreater(circumradius_mean(self.density), aaecc_radius(self.density))

    def test_truncation_residual_is_finite(self):
        residual = circumradius_truncation_residual(self.density, np.linspace(0.0, 3e4, 50))
        self.assertTrue(np.all(np.isfinite(residual)))
        self.assertTrue(np.all(residual >= 0))

    def test_zeta_depends_on_density_times_area(self):
        self.assertAlmostEqual(zeta_k(1e-6, 400.0, 2) / zeta_k(4e-6, 200.0, 2), 1.0)
        with self.assertRaises(ValueError):
            zeta_k(1e-6, 400.0, 0)

    def test_negative_radius_rejected(self):
        with self.assertRaises(ValueError):
            circumradius_pdf(self.density, -1.0)

    @tag("slow")
    def test_series_mean_matches_voronoi_oracle(self):
        samples = circumradius_samples(self.density, 1500, np.random.default_rng(4))
        self.assertAlmostEqual(samples.mean() / circumradius_mean(self.density), 1.0, delta=0.1)
