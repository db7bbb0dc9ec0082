from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.utils import slugify

DEFAULT_SEED = 20120301


class SetupOptions(BaseModel):
    """Parameters of the setup phase."""

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(1.5, ge=1.0, le=2.0)
    guard: float = Field(0.7, gt=0.0, lt=1.0)
    seed: int = DEFAULT_SEED
    coarsest_size: int = Field(150, ge=1)
    relax_acf_threshold: float = Field(0.7, gt=0.0, lt=1.0)
    acf_sweeps: int = Field(15, ge=2)
    tv_count: int = Field(8, ge=2)
    tv_sweeps: int = Field(3, ge=0)
    max_agg_stages: int = Field(2, ge=1)
    energy_ratio_max: float = Field(2.5, ge=1.0)
    max_escalations: int = Field(3, ge=0)
    ratio_escalation: float = Field(2.0, ge=1.0)
    seed_degree_factor: float = Field(8.0, gt=0.0)
    max_levels: int = Field(100, ge=1)
    cycle_index_rule: Literal['corrected', 'printed'] = 'corrected'

    @property
    def alpha_max(self) -> float:
        return self.guard / self.gamma


class SolveOptions(BaseModel):
    """Parameters of one solve."""

    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(1e-8, gt=0.0, lt=1.0)
    max_cycles: int = Field(100, ge=1)
    correction: Literal['flat', 'adaptive'] = 'flat'
    mu: float = Field(4.0 / 3.0, ge=1.0, le=2.0)
    theta_max: int = 2
    seed: int = DEFAULT_SEED

    @field_validator('theta_max')
    @classmethod
    def _check_theta(cls, value: int) -> int:
        if value not in (1, 2):
            raise ValueError('theta_max must be 1 or 2')
        return value


class BenchmarkConfig(BaseModel):
    """One benchmark case as given on the command line or in a suite file."""

    input: str
    name: Optional[str] = None
    mode: Literal['adjacency', 'laplacian'] = 'adjacency'
    gamma: float = Field(1.5, ge=1.0, le=2.0)
    guard: float = Field(0.7, gt=0.0, lt=1.0)
    correction: Literal['flat', 'adaptive'] = 'adaptive'
    mu: float = Field(4.0 / 3.0, ge=1.0, le=2.0)
    tolerance: float = Field(1e-8, gt=0.0, lt=1.0)
    max_cycles: int = Field(100, ge=1)
    seed: int = DEFAULT_SEED
    coarsest_size: int = Field(150, ge=1)
    output: str = 'results'

    @model_validator(mode='after')
    def _default_name(self) -> 'BenchmarkConfig':
        if not self.name:
            source = self.input[4:] if self.input.startswith('gen:') else Path(self.input).stem
            self.name = slugify(source)
        return self

    def setup_options(self) -> SetupOptions:
        return SetupOptions(
            gamma=self.gamma,
            guard=self.guard,
            seed=self.seed,
            coarsest_size=self.coarsest_size,
        )

    def solve_options(self, correction: str) -> SolveOptions:
        return SolveOptions(
            tolerance=self.tolerance,
            max_cycles=self.max_cycles,
            correction=correction,
            mu=self.mu,
            seed=self.seed,
        )


class SuiteCase(BaseModel):
    """Entry of a YAML suite; unspecified fields fall back to the suite defaults."""

    name: Optional[str] = None
    input: str
    mode: Literal['adjacency', 'laplacian'] = 'adjacency'
    overrides: dict = Field(default_factory=dict)

    def to_config(self, output: str, defaults: Optional[dict] = None) -> BenchmarkConfig:
        data = dict(defaults or {})
        data.update(self.overrides)
        data.update(input=self.input, mode=self.mode, output=output)
        if self.name:
            data['name'] = self.name
        return BenchmarkConfig(**data)
