"""
Experiment orchestration behind `manage.py coexist`: config loading, one row
builder per subcommand and the CSV writer.
"""
import configparser
import copy
import csv
import logging
import math
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from django.conf import settings

from coexistApp.avgint import (
    avg_interference_aaecc,
    avg_interference_aaecc_approx,
    avg_interference_cbc,
    avg_interference_cbc_approx,
    eta_ca,
)
from coexistApp.choices import Method
from coexistApp.config import ExperimentConfig, SweepPoint
from coexistApp.detection import min_exclusion_radius, roc_curve
from coexistApp.exceptions import ConfigError, RegimeWarning
from coexistApp.intdist import i_exc, idom_cdf, itot_cdf_values, itot_di, itot_support, rdom_upper
from coexistApp.serializers import BLOCK_SERIALIZERS, DeploymentSerializer
from coexistApp.simkit import empirical_cdf, interference_samples, jsd
from coexistApp.stochgeom import watts_to_dbm

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12
INFEASIBLE = "infeasible"


# ============================
# CONFIG
# ============================
def _flatten_errors(prefix, errors):
    lines = []
    for field, messages in errors.items():
        where = prefix if field == "non_field_errors" else f"{prefix}.{field}"
        if isinstance(messages, dict):
            # list-field errors are keyed by item index
            messages = [f"item {index}: {msg}" for index, msgs in messages.items() for msg in msgs]
        lines.extend(f"{where}: {message}" for message in messages)
    return lines


def _read_ini(path):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        where = f"{path}: line {line}" if line is not None else str(path)
        raise ConfigError(f"{where}: {exc.message.splitlines()[0]}")
    unknown = [name for name in parser.sections() if name not in BLOCK_SERIALIZERS]
    if unknown:
        raise ConfigError([f"{path}: unknown section [{name}]" for name in unknown])
    return {name: dict(parser.items(name)) for name in parser.sections()}


def _apply_overrides(blocks, overrides):
    diagnostics = []
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, field = key.strip().partition(".")
        if not sep or not dot or not field:
            diagnostics.append(f"--set {item}: expected section.key=value")
        elif section not in blocks:
            diagnostics.append(f"--set {item}: unknown section [{section}]")
        else:
            blocks[section][field] = value.strip()
    if diagnostics:
        raise ConfigError(diagnostics)


def _validate_block(name, data, diagnostics):
    serializer = BLOCK_SERIALIZERS[name](data=data)
    if serializer.is_valid():
        return serializer.save()
    diagnostics.extend(_flatten_errors(name, serializer.errors))
    return None


def _sweep_grid(blocks, sweep, diagnostics):
    target = "deployment" if sweep.parameter in DeploymentSerializer._declared_fields else "detection"
    grid = []
    for value in sweep.values:
        local = {name: dict(block) for name, block in blocks.items()}
        local[target][sweep.parameter] = f"{value:.17g}"
        errors = []
        dep = _validate_block("deployment", local["deployment"], errors)
        setup = _validate_block("detection", local["detection"], errors)
        if errors:
            diagnostics.extend(f"sweep.values: {value:g}: {line}" for line in errors)
            continue
        grid.append(SweepPoint(value, dep, setup))
    return tuple(grid)


def load_config(path=None, overrides=()):
    """
    Resolve an ExperimentConfig from the COEXIST defaults, an optional INI
    file (authoritative for the sections it contains) and `section.key=value`
    overrides. Every problem is collected into one ConfigError.
    """
    blocks = copy.deepcopy(settings.COEXIST)
    if path is not None:
        blocks.update(_read_ini(path))
    _apply_overrides(blocks, overrides)

    diagnostics = []
    records = {name: _validate_block(name, blocks.get(name, {}), diagnostics) for name in BLOCK_SERIALIZERS}
    if diagnostics:
        raise ConfigError(diagnostics)
    grid = _sweep_grid(blocks, records["sweep"], diagnostics)
    if diagnostics:
        raise ConfigError(diagnostics)
    logger.info("config resolved: sweep %s over %d values", records["sweep"].parameter, len(grid))
    return ExperimentConfig(grid=grid, blocks=blocks, **records)


def write_config(config: ExperimentConfig, path):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_dict(config.blocks)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        parser.write(handle)
    return Path(path)


# ============================
# CSV
# ============================
def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{float(value):.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
    logger.info("wrote %s (%d rows)", path, len(rows))
    return path


@contextmanager
def captured_regime_warnings():
    """Collect RegimeWarning messages raised inside the block into a list."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        messages = []
        yield messages
        seen = []
        for item in caught:
            text = str(item.message)
            if issubclass(item.category, RegimeWarning) and text not in seen:
                seen.append(text)
        messages.extend(seen)


def _dbm(watts):
    return watts_to_dbm(watts) if watts and watts > 0 else None


# ============================
# ROW BUILDERS
# ============================
AVG_HEADER = [
    "sweep_value",
    "mean_cbc_w", "mean_cbc_dbm",
    "mean_cbc_approx_w", "mean_cbc_approx_dbm",
    "mean_aaecc_w", "mean_aaecc_dbm", "std_aaecc_w", "std_aaecc_dbm",
    "mean_aaecc_approx_w", "mean_aaecc_approx_dbm", "std_aaecc_approx_w", "std_aaecc_approx_dbm",
    "eta_ca", "h_bs_sqrt_pi_lambda", "warnings",
]


def avg_interference_rows(config: ExperimentConfig):
    rows = []
    for point in config.grid:
        dep = point.deployment
        with captured_regime_warnings() as notes:
            cbc = avg_interference_cbc(dep)
            cbc_approx = avg_interference_cbc_approx(dep)
            aaecc = avg_interference_aaecc(dep)
            aaecc_approx = avg_interference_aaecc_approx(dep)
            eta = eta_ca(dep)
        rows.append([
            point.value,
            cbc.mean_w, cbc.mean_dbm,
            cbc_approx.mean_w, cbc_approx.mean_dbm,
            aaecc.mean_w, aaecc.mean_dbm, aaecc.std_w, aaecc.std_dbm,
            aaecc_approx.mean_w, aaecc_approx.mean_dbm, aaecc_approx.std_w, aaecc_approx.std_dbm,
            eta, dep.h_bs * math.sqrt(math.pi * dep.density), " | ".join(notes),
        ])
        logger.info("avg-interference %s=%g: %s", config.sweep.parameter, point.value, aaecc)
    return AVG_HEADER, rows


CDF_HEADER = ["sweep_value", "i_w", "i_dbm", "itot_cdf", "idom_cdf", "mc_cdf", "warnings"]
JSD_HEADER = ["sweep_value", "jsd", "trials", "warnings"]


def interference_axis(dep, points, scale):
    """Interference values spanning the DI law from its r_dom tail to its upper support point."""
    upper = itot_support(dep)
    lower = itot_di(dep, rdom_upper(dep))
    if scale == "log":
        return np.geomspace(lower, upper, points)
    return np.linspace(lower, upper, points)


def interference_cdf_rows(config: ExperimentConfig, workers=1):
    cdf_rows, jsd_rows = [], []
    for point in config.grid:
        dep = point.deployment
        with captured_regime_warnings() as notes:
            samples = interference_samples(dep, config.mc, workers)[:, 0]
            axis = interference_axis(dep, config.cdf.points, config.cdf.scale)
            itot = itot_cdf_values(dep, axis)
            idom = idom_cdf(dep, np.minimum(axis, i_exc(dep)))
            mc = empirical_cdf(samples)(axis)
            divergence = jsd(samples, lambda edges: itot_cdf_values(dep, edges), config.mc.bins, config.cdf.scale)
        note = " | ".join(notes)
        cdf_rows.extend(
            [point.value, i, _dbm(i), a, b, c, note] for i, a, b, c in zip(axis, itot, idom, mc)
        )
        jsd_rows.append([point.value, divergence, config.mc.trials, note])
        logger.info("interference-cdf %s=%g: jsd=%.4f", config.sweep.parameter, point.value, divergence)
    return (CDF_HEADER, cdf_rows), (JSD_HEADER, jsd_rows)


ROC_HEADER = ["sweep_value", "method", "p_th_w", "p_th_dbm", "pfa", "pd", "warnings"]


def roc_rows(config: ExperimentConfig):
    rows = []
    thresholds = config.roc.thresholds
    for point in config.grid:
        for method in config.roc.methods:
            with captured_regime_warnings() as notes:
                curve = roc_curve(point.deployment, point.detection, thresholds, method)
            note = " | ".join(notes)
            rows.extend(
                [point.value, p.method, p.p_th, _dbm(p.p_th), p.pfa, p.pd, note] for p in curve
            )
        logger.info("roc %s=%g: %d thresholds", config.sweep.parameter, point.value, thresholds.size)
    return ROC_HEADER, rows


MIN_EXCLUSION_HEADER = ["pd_thr", "pfa_thr", "r_exc_min_m", "warnings"]


def min_exclusion_rows(config: ExperimentConfig, method=Method.CHISQ):
    rows = []
    candidates = config.search.candidates
    for pd_thr, pfa_thr in config.search.targets():
        with captured_regime_warnings() as notes:
            radius = min_exclusion_radius(
                config.deployment, config.detection, pd_thr, pfa_thr, candidates, method
            )
        rows.append([pd_thr, pfa_thr, INFEASIBLE if radius is None else radius, " | ".join(notes)])
        logger.info("min-exclusion pd>=%g pfa<=%g: %s", pd_thr, pfa_thr, rows[-1][2])
    return MIN_EXCLUSION_HEADER, rows


# ============================
# SUBCOMMANDS
# ============================
def run_avg_interference(config, out_dir, workers=1):
    return [write_csv(Path(out_dir) / "avg_interference.csv", *avg_interference_rows(config))]


def run_interference_cdf(config, out_dir, workers=1):
    cdf, divergence = interference_cdf_rows(config, workers)
    return [
        write_csv(Path(out_dir) / "interference_cdf.csv", *cdf),
        write_csv(Path(out_dir) / "interference_jsd.csv", *divergence),
    ]


def run_roc(config, out_dir, workers=1):
    return [write_csv(Path(out_dir) / "roc.csv", *roc_rows(config))]


def run_min_exclusion(config, out_dir, workers=1):
    return [write_csv(Path(out_dir) / "min_exclusion.csv", *min_exclusion_rows(config))]


SUBCOMMANDS = {
    "avg-interference": run_avg_interference,
    "interference-cdf": run_interference_cdf,
    "roc": run_roc,
    "min-exclusion": run_min_exclusion,
}
