"""JSON scenario configuration (schema version 1)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .effective_capacity import Method
from .errors import DomainError

SCHEMA_VERSION = 1
SWEEP_VARIABLES = ("epsilon", "n_nodes", "snr", "theta", "blocklength", "bystander_op_sinr")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioFields(_Strict):
    n_nodes: int = Field(ge=1)
    snr: float
    snr_unit: Literal["linear", "db"] = "linear"
    blocklength: int = Field(ge=1)
    delay_exponent: float = Field(gt=0)

    @model_validator(mode="after")
    def _positive_linear_snr(self):
        if self.snr_unit == "linear" and not self.snr > 0:
            raise ValueError("snr must be > 0 when snr_unit is 'linear'")
        return self

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr / 10.0) if self.snr_unit == "db" else self.snr


class QosFields(_Strict):
    outage_probability: float = Field(gt=0, lt=1)
    max_delay: Optional[float] = Field(default=None, gt=0)


class PriorityFields(_Strict):
    eta_alpha: float = Field(ge=0)
    eta_theta: float = Field(ge=0)

    @model_validator(mode="after")
    def _not_both_zero(self):
        if self.eta_alpha == 0 and self.eta_theta == 0:
            raise ValueError("eta_alpha and eta_theta cannot both be zero")
        return self


class SweepFields(_Strict):
    variable: Literal[SWEEP_VARIABLES]
    min: Optional[float] = None
    max: Optional[float] = None
    points: int = Field(ge=2)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _range(self):
        # the joint-model axis defaults to the full admissible interval
        if self.variable != "bystander_op_sinr" and (self.min is None or self.max is None):
            raise ValueError(f"sweep over {self.variable} needs min and max")
        if self.min is not None and self.max is not None and not self.min < self.max:
            raise ValueError("sweep min must be < max")
        if self.spacing == "log" and self.min is not None and self.min <= 0:
            raise ValueError("log spacing needs min > 0")
        return self


class ScenarioConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    scenario: ScenarioFields
    epsilon: Optional[float] = Field(default=None, gt=0, le=1)
    method: str = "series:2"
    qos: Optional[QosFields] = None
    priorities: Optional[PriorityFields] = None
    sweep: Optional[SweepFields] = None
    output_path: Optional[str] = None
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    samples: int = Field(default=1_000_000, ge=1000)

    @field_validator("method")
    @classmethod
    def _known_method(cls, v):
        try:
            Method.parse(v)
        except DomainError as exc:
            raise ValueError(str(exc)) from exc
        return v

    @property
    def parsed_method(self) -> Method:
        return Method.parse(self.method, samples=self.samples, seed=self.seed)


def load_config(path: "str | Path") -> dict:
    """Read a JSON config file into a plain dict (validation happens later)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError(f"{path}: top level must be a JSON object")
    return data
