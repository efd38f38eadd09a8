"""
Validated experiment configuration.

`coexistApp.serializers` turns INI blocks into these frozen records;
`coexistApp.experiments.load_config` assembles them into an ExperimentConfig.
"""
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from coexistApp.detection import DetectionSetup
from coexistApp.simkit import McConfig
from coexistApp.stochgeom import Deployment


@dataclass(frozen=True)
class Sweep:
    parameter: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class RocGrid:
    p_th_min: float
    p_th_max: float
    points: int
    methods: Tuple[str, ...]

    @property
    def thresholds(self):
        return np.geomspace(self.p_th_min, self.p_th_max, self.points)


@dataclass(frozen=True)
class SearchGrid:
    pd_thr: Tuple[float, ...]
    pfa_thr: Tuple[float, ...]
    start: float
    stop: float
    step: float

    @property
    def candidates(self):
        return np.arange(self.start, self.stop + 0.5 * self.step, self.step)

    def targets(self):
        return [(pd, pfa) for pd in self.pd_thr for pfa in self.pfa_thr]


@dataclass(frozen=True)
class CdfGrid:
    points: int
    scale: str


@dataclass(frozen=True)
class SweepPoint:
    value: float
    deployment: Deployment
    detection: DetectionSetup


@dataclass(frozen=True)
class ExperimentConfig:
    deployment: Deployment
    detection: DetectionSetup
    mc: McConfig
    sweep: Sweep
    roc: RocGrid
    search: SearchGrid
    cdf: CdfGrid
    # one revalidated (deployment, detection) pair per sweep value
    grid: Tuple[SweepPoint, ...] = ()
    # resolved string blocks, written back as config.ini
    blocks: Dict[str, Dict[str, str]] = field(default_factory=dict, compare=False)
