"""Scenario files: JSON with a params block and optional sweep/oracle blocks."""

import json
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

import settings
from errors import ScenarioError
from market import MarketParams
from oracle import OracleConfig
from sweep import eps_range


class SweepBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    eps_from: float = Field(ge=0, le=1)
    eps_to: float = Field(ge=0, le=1)
    eps_step: float = Field(gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if self.eps_to < self.eps_from:
            raise ValueError("eps_to must not be below eps_from")
        return self

    def grid(self):
        return eps_range(self.eps_from, self.eps_to, self.eps_step)


class ScenarioFile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    params: MarketParams
    sweep: Optional[SweepBlock] = None
    oracle: Optional[OracleConfig] = None


def parse_scenario(raw: bytes) -> ScenarioFile:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ScenarioError("scenario is not UTF-8", offset=exc.start)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg}", offset=len(text[:exc.pos].encode("utf-8")))
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = ".".join(str(part) for part in error["loc"]) or None
        offset = None
        if error["loc"] and isinstance(error["loc"][-1], str):
            found = text.find(f'"{error["loc"][-1]}"')
            offset = len(text[:found].encode("utf-8")) if found >= 0 else None
        raise ScenarioError(error["msg"], offset=offset, key=key)


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}")
    return parse_scenario(raw)


def dump_scenario(scenario: ScenarioFile) -> str:
    return scenario.model_dump_json(indent=2, exclude_none=True) + "\n"


def bundled_scenario(name) -> ScenarioFile:
    return load_scenario(Path(settings.SCENARIO_DIR) / f"{name}.json")
