"""Model descriptions for fitting: compartment structure, transmission
formulation, smoothing rule, and priors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alarms import SmoothingRule
from .chain import Population
from .priors import PriorSpec

TRANSMISSIONS = ("constant", "flexible", "intervention", "alarm")
ALARM_FAMILIES = ("power", "threshold", "hill", "spline", "gp")


@dataclass
class ModelSpec:
    """Everything that defines one fittable model."""

    name: str = ""
    compartments: str = "sir"  # "sir" | "seir"
    transmission: str = "constant"
    alarm_family: str | None = None
    smoothing: SmoothingRule | None = None
    intervention_day: int | None = None
    alarm_knots: int = 3      # interior knots of the spline alarm
    betat_knots: int = 3      # interior knots of the flexible-rate spline
    gp_grid_size: int = 50
    estimate_initial_conditions: bool = False
    priors: PriorSpec = field(default_factory=PriorSpec)

    def __post_init__(self):
        if self.compartments not in ("sir", "seir"):
            raise ValueError("compartments must be 'sir' or 'seir'")
        if self.transmission not in TRANSMISSIONS:
            raise ValueError(f"transmission must be one of {TRANSMISSIONS}")
        if self.transmission == "alarm":
            if self.alarm_family not in ALARM_FAMILIES:
                raise ValueError(f"alarm_family must be one of {ALARM_FAMILIES}")
            if self.smoothing is None:
                raise ValueError("alarm models need a smoothing rule")
        if self.transmission == "intervention" and self.intervention_day is None:
            raise ValueError("intervention models need intervention_day")
        if not self.name:
            self.name = self._default_name()

    def _default_name(self) -> str:
        if self.transmission == "alarm":
            return f"{self.alarm_family}-alarm"
        return {
            "constant": "no-behavior-change",
            "flexible": "flexible-beta-t",
            "intervention": "intervention",
        }[self.transmission]

    @property
    def seir(self) -> bool:
        return self.compartments == "seir"


@dataclass
class FitData:
    """Observed data for one fit.

    ``istar`` is the daily incidence series. ``rstar`` may be None (fully
    latent removals, the default setting) or observed; per-day boolean
    masks allow partial observation (True = observed, immutable). The
    exposure series of an SEIR model is always latent. ``alarm_input``
    (default: the observed incidence) feeds the alarm functions and is
    never touched by imputation.
    """

    pop: Population
    istar: np.ndarray
    rstar: np.ndarray | None = None
    istar_mask: np.ndarray | None = None
    rstar_mask: np.ndarray | None = None
    alarm_input: np.ndarray | None = None

    def __post_init__(self):
        self.istar = np.asarray(self.istar, dtype=np.int64)
        tau = self.istar.size
        if self.rstar is not None:
            self.rstar = np.asarray(self.rstar, dtype=np.int64)
            if self.rstar.size != tau:
                raise ValueError("rstar length must match istar")
        if self.istar_mask is None:
            self.istar_mask = np.ones(tau, dtype=bool)
        else:
            self.istar_mask = np.asarray(self.istar_mask, dtype=bool)
        if self.rstar_mask is None:
            self.rstar_mask = np.full(tau, self.rstar is not None)
        else:
            self.rstar_mask = np.asarray(self.rstar_mask, dtype=bool)
        if self.alarm_input is None:
            self.alarm_input = self.istar.copy()
        else:
            self.alarm_input = np.asarray(self.alarm_input, dtype=np.int64)

    @property
    def tau(self) -> int:
        return int(self.istar.size)
