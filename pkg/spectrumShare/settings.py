"""
Django settings for spectrumShare project.

The project hosts a single app, ``coexistApp``: analytic and Monte Carlo
interference / detection analysis for a radar sharing spectrum with a
Poisson field of 3D-beamforming base stations. There is no database and no
HTTP surface; everything runs through ``manage.py coexist``.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""

from pathlib import Path

import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env(
    DJANGO_DEBUG=(bool, False),
    COEXIST_WORKERS=(int, 1),
    COEXIST_LOG_LEVEL=(str, "INFO"),
)
if (BASE_DIR / ".env").exists():
    environ.Env.read_env(BASE_DIR / ".env")


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = env("DJANGO_SECRET_KEY", default="coexist-local-only-key")

DEBUG = env("DJANGO_DEBUG")

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'coexistApp',
]

# No persistence: results go to CSV files.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# ============================
# LOGGING
# ============================
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "coexistApp": {
            "handlers": ["console"],
            "level": env("COEXIST_LOG_LEVEL"),
            "propagate": False,
        },
        "django": {
            "handlers": ["console"],
            "level": "WARNING",
        },
    },
}


# ============================
# COEXISTENCE DEFAULTS
# ============================
# Values are strings, exactly as they would appear in an experiment .ini file;
# coexistApp.serializers validates and converts them.
COEXIST = {
    "deployment": {
        "lambda_bs": "0.01",        # km^-2
        "r_exc": "5000",            # m
        "h_bs": "50",
        "h_rad": "20",
        "p_bs": "1",                # W
        "k_users": "4",
        "alpha": "4",
        "pl_ref": "",               # blank -> 3D UMa LoS intercept
        "f_c": "5",                 # GHz
        "bs_n_az": "10",
        "bs_n_el": "10",
        "rad_n_az": "10",
        "rad_n_el": "10",
        "theta_rad_deg": "60",
        "phi_rad_deg": "-10",
    },
    "detection": {
        "n_samples": "10",
        "p_tar": "1e-7",            # W
        "noise_w": "1e-9",          # W
        "p_th": "2e-9",             # W
    },
    "mc": {
        "trials": "20000",
        "seed": "20190524",
        "cell_model": "AAECC",
        "bins": "200",
        "exact_geometry": "true",
    },
    "sweep": {
        "parameter": "r_exc",
        "values": "5000, 10000, 20000, 40000",
    },
    "roc": {
        "p_th_min": "1e-9",
        "p_th_max": "1e-6",
        "points": "40",
        "methods": "CHISQ, CLT",
    },
    "search": {
        "pd_thr": "0.8, 0.9, 0.95",
        "pfa_thr": "0.01, 0.05, 0.1",
        "start": "0",
        "stop": "35000",
        "step": "500",
    },
    "cdf": {
        "points": "200",
        "scale": "linear",
    },
}

COEXIST_WORKERS = env("COEXIST_WORKERS")

COEXIST_OUTPUT_DIR = BASE_DIR / "coexist-out"
