"""
Run configuration for the command-line front-end.
One validated pydantic model per invocation, built from an optional flat
JSON config file with explicitly given command-line flags on top.
"""

import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from games.data_schemas import (
    STRUCTURE_ALIASES,
    TIE_RULE_ALIASES,
    AuctionSpec,
    Rational,
    Structure,
    TieRule,
)
from solvers.result_schemas import Scope

COMMANDS = (
    'describe', 'reduce', 'solve-symmetric', 'enumerate', 'verify',
    'tables', 'asym-fp3', 'prop5', 'converge', 'thresholds',
)

OutputFormat = Literal['json', 'csv', 'markdown']

# Format used when neither the flag nor the config file names one
DEFAULT_FORMATS: Dict[str, str] = {
    'describe': 'markdown',
    'reduce': 'json',
    'solve-symmetric': 'json',
    'enumerate': 'json',
    'verify': 'json',
    'tables': 'markdown',
    'asym-fp3': 'csv',
    'prop5': 'markdown',
    'converge': 'csv',
    'thresholds': 'csv',
}

SCOPE_ALIASES = {
    'monotone': Scope.MONOTONE_UNDOMINATED,
    'monotone_undominated': Scope.MONOTONE_UNDOMINATED,
    'full': Scope.FULLY_EXHAUSTIVE,
    'fully_exhaustive': Scope.FULLY_EXHAUSTIVE,
}


def _lookup(aliases: Dict[str, Any], value: Any, what: str) -> Any:
    if not isinstance(value, str):
        return value
    key = value.strip().lower().replace('-', '_')
    if key not in aliases:
        raise ValueError(f"unknown {what} {value!r}; choose from {', '.join(sorted(aliases))}")
    return aliases[key]


def _int_list(value: Any) -> Any:
    if isinstance(value, str):
        return [int(part) for part in value.replace(' ', '').split(',') if part]
    return value


class RunConfig(BaseModel):
    """
    Everything one subcommand needs.

    Unknown keys are rejected, so a typo in a config file fails with the
    offending key in the error location instead of being ignored.
    """

    model_config = ConfigDict(
        extra='forbid',
        arbitrary_types_allowed=True,
        json_schema_extra={
            "example": {
                "command": "solve-symmetric",
                "structure": "fp",
                "tie_rule": "none",
                "n": 2,
                "x": 10,
                "delta": "1",
            }
        },
    )

    command: Literal[COMMANDS] = Field(..., description="Subcommand to run")

    # Game
    structure: Structure = Field(default=Structure.FIRST_PRICE, description="fp, sp or ap")
    tie_rule: TieRule = Field(default=TieRule.NO_WINNER_ON_TIES, description="fair or none")
    n: int = Field(default=2, ge=2, description="Number of bidders")
    x: int = Field(default=10, ge=0, description="Maximum value index")
    delta: Rational = Field(default=Fraction(1), description="Grid step as 'p/q'")
    pmf: Optional[Tuple[Rational, ...]] = Field(default=None, description="Value pmf override")

    # Search
    scope: Scope = Field(default=Scope.MONOTONE_UNDOMINATED)
    budget: Optional[int] = Field(default=None, ge=1, description="Node budget")
    exact_budget: Optional[int] = Field(default=None, ge=1, description="Exact dominance profile budget")
    jobs: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    prune: bool = True
    cap: Optional[int] = Field(default=None, ge=0, description="Largest x searched exhaustively")
    collapse: bool = False
    stop_at_first: bool = False

    # Output
    output: Optional[str] = Field(default=None, description="Artifact path (stdout when omitted)")
    format: Optional[OutputFormat] = None

    # verify
    profile: Optional[str] = Field(
        default=None, description="Profile as a JSON file path or 'b,b,...;b,b,...' (one group per player)"
    )
    beta: Optional[Tuple[int, ...]] = Field(default=None, description="Symmetric bidding function")

    # tables
    which: Tuple[int, ...] = (1, 2)
    include_blank: bool = True

    # prop5
    upper: Rational = Field(default=Fraction(12), description="Highest continuous value")
    grid_count: Optional[int] = Field(default=None, ge=1, description="Number of grid steps on [0, upper]")

    # converge
    top: Rational = Field(default=Fraction(1), description="Highest value X")
    deltas: Optional[Tuple[Rational, ...]] = None
    halvings: int = Field(default=3, ge=0)

    # thresholds
    n_max: Optional[int] = Field(default=None, ge=2)
    x_max: Optional[int] = Field(default=None, ge=0)

    @field_validator('structure', mode='before')
    @classmethod
    def _structure_alias(cls, value: Any) -> Any:
        return _lookup(STRUCTURE_ALIASES, value, "structure")

    @field_validator('tie_rule', mode='before')
    @classmethod
    def _tie_rule_alias(cls, value: Any) -> Any:
        return _lookup(TIE_RULE_ALIASES, value, "tie rule")

    @field_validator('scope', mode='before')
    @classmethod
    def _scope_alias(cls, value: Any) -> Any:
        return _lookup(SCOPE_ALIASES, value, "scope")

    @field_validator('beta', 'which', mode='before')
    @classmethod
    def _comma_separated(cls, value: Any) -> Any:
        return _int_list(value)

    @field_validator('pmf', 'deltas', mode='before')
    @classmethod
    def _rational_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [part for part in value.replace(' ', '').split(',') if part]
        return value

    @model_validator(mode='after')
    def _check_ranges(self) -> 'RunConfig':
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.n_max is not None and self.n_max < self.n:
            raise ValueError(f"n_max {self.n_max} is below n {self.n}")
        if self.x_max is not None and self.x_max < self.x:
            raise ValueError(f"x_max {self.x_max} is below x {self.x}")
        return self

    @property
    def output_format(self) -> str:
        return self.format or DEFAULT_FORMATS[self.command]

    def auction_spec(self) -> AuctionSpec:
        """The canonical game named by structure, tie rule, n, x, δ and pmf."""
        return AuctionSpec.canonical_game(self.structure, self.tie_rule, self.n, self.x,
                                          delta=self.delta, pmf=self.pmf)

    def n_values(self) -> List[int]:
        return list(range(self.n, (self.n_max or self.n) + 1))

    def x_values(self) -> List[int]:
        return list(range(self.x, (self.x_max if self.x_max is not None else self.x) + 1))


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat JSON config file.

    Keys mirror the long command-line flags with dashes as underscores.

    Raises:
        ValueError: If the file is not a JSON object
    """
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ValueError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return data


def build_run_config(command: str, flags: Dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """
    Merge config file values and command-line flags into a RunConfig.

    Args:
        command: Subcommand name
        flags: Flags given explicitly on the command line
        config_path: Optional JSON config file

    Returns:
        Validated RunConfig (raises pydantic.ValidationError otherwise)
    """
    data: Dict[str, Any] = load_config_file(config_path) if config_path else {}
    data.update(flags)
    data['command'] = command
    return RunConfig.model_validate(data)
