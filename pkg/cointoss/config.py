"""Run configuration: pydantic models read from JSON files and CLI flags."""
import json
import logging
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import (BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt,
                      ValidationError, model_validator)

from cointoss import settings
from cointoss.errors import BudgetError, ConfigError
from cointoss.measure import BlockRule, Constant, WeightSequence, block_end_depths
from cointoss.spectrum import geometric_depths


logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Tolerances(_Strict):
    identity: PositiveFloat = 1e-12
    composition: PositiveFloat = 1e-10
    oracle: PositiveFloat = 1e-9
    finite_difference: PositiveFloat = 1e-6
    equality: PositiveFloat = 1e-10
    slope: PositiveFloat = 1e-8
    kink_location: PositiveFloat = 1e-4
    limit_gap: PositiveFloat = 1e-3
    bracket: PositiveFloat = 1e-2
    eps_q: PositiveFloat = 1e-3
    counterexample: PositiveFloat = 5e-2
    realization: PositiveFloat = 1e-2
    sigmas: PositiveFloat = 3.0


class GridSpec(_Strict):
    """Evenly spaced grid start, start + step, ..., stop."""
    start: float
    stop: float
    step: PositiveFloat

    @model_validator(mode="after")
    def _check_order(self):
        if self.stop < self.start:
            raise ValueError(f"grid stop {self.stop} is below its start {self.start}")
        return self

    def values(self) -> np.ndarray:
        count = int(round((self.stop - self.start) / self.step))
        return np.round(self.start + self.step * np.arange(count + 1), 12)


class DepthSchedule(_Strict):
    """explicit: ``depths``; geometric: ``count`` log-spaced depths in
    [start, stop]; linear: range(start, stop + 1, step); block_ends: the block
    ends of the sequence up to ``stop``, then ``stop`` itself."""
    kind: Literal["explicit", "geometric", "linear", "block_ends"] = "geometric"
    depths: list[PositiveInt] = Field(default_factory=list)
    start: PositiveInt = 10
    stop: PositiveInt = 10_000
    count: PositiveInt = 25
    step: PositiveInt = 1

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "explicit":
            if not self.depths:
                raise ValueError("an explicit depth schedule needs depths")
            if any(b <= a for a, b in zip(self.depths, self.depths[1:])):
                raise ValueError("depths must be strictly increasing")
        elif self.stop < self.start:
            raise ValueError(f"depth stop {self.stop} is below its start {self.start}")
        return self

    @property
    def max_depth(self) -> int:
        return self.depths[-1] if self.kind == "explicit" else self.stop

    def resolve(self, w: Optional[WeightSequence] = None) -> list[int]:
        if self.kind == "explicit":
            return list(self.depths)
        if self.kind == "geometric":
            return geometric_depths(self.start, self.stop, self.count)
        if self.kind == "linear":
            return list(range(self.start, self.stop + 1, self.step))
        if w is None:
            raise ConfigError("a block_ends schedule needs a block-structured sequence")
        ends = [d for d in block_end_depths(w, self.stop) if d >= self.start]
        return ends if ends and ends[-1] == self.stop else ends + [self.stop]


CONSTRUCTION_BLOCKS = BlockRule(kind="explicit", lengths=(8, 64, 1024, 32768, 1048576))


class ConstructionOptions(_Strict):
    targets: list[float] = Field(default_factory=lambda: [1.5, 5.0, 2.0, 4.0])
    stages: int = Field(default=3, ge=1, le=8)
    palette: list[float] = Field(default_factory=lambda: [0.2, 0.4])
    blocks: BlockRule = CONSTRUCTION_BLOCKS
    horizon: float = Field(default=8.0, gt=1.0)
    case_two_budget: PositiveInt = 40
    # None: chain for a fresh run, the saved mode when resuming
    nesting: Optional[Literal["chain", "dense"]] = None
    resume: Optional[Path] = None


class SamplingOptions(_Strict):
    depth: PositiveInt = 10_000
    samples: PositiveInt = 1_000
    q: float = 1.0


class RunConfig(_Strict):
    sequence: WeightSequence = Constant(p=0.3)
    q_grid: GridSpec = GridSpec(start=-5.0, stop=5.0, step=0.25)
    legendre_q_grid: GridSpec = GridSpec(start=-20.0, stop=20.0, step=0.01)
    alpha_grid: GridSpec = GridSpec(start=0.2, stop=2.0, step=0.05)
    kink_grid: GridSpec = GridSpec(start=1.01, stop=8.0, step=0.01)
    depths: DepthSchedule = DepthSchedule()
    tail_fraction: float = Field(default=0.5, gt=0.0, le=1.0)
    q: float = 2.0
    s: float = 1.7
    enumeration_depth: PositiveInt = 12
    coarse_bins: PositiveInt = 50
    seed: int = 20240601
    sampling: SamplingOptions = SamplingOptions()
    construction: ConstructionOptions = ConstructionOptions()
    tolerances: Tolerances = Tolerances()
    output: Optional[Path] = None

    def check_budget(self) -> None:
        if self.enumeration_depth > settings.ENUMERATION_CAP:
            raise BudgetError(
                f"enumeration depth {self.enumeration_depth} exceeds the cap "
                f"{settings.ENUMERATION_CAP} (COINTOSS_ENUMERATION_CAP)")


def _merge(data: dict, overrides: dict) -> None:
    """Nested sections merge key by key; None values are ignored."""
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(data.get(key), dict) and "kind" not in value:
            _merge(data[key], value)
        else:
            data[key] = value


def load_config(path: Optional[Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read a RunConfig from JSON and apply flag overrides on top.

    I/O errors propagate unchanged; everything else becomes a ConfigError.
    """
    data: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a JSON object")
    _merge(data, overrides or {})
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration: {exc}") from exc
    logger.debug("Loaded configuration: %s", config.model_dump_json())
    return config


def config_schema() -> dict:
    return RunConfig.model_json_schema()
