from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from validation import (
    validate_interval,
    validate_spatial_vector,
    validate_cutoff_box,
    validate_increasing,
    validate_decreasing,
)


class DerivativeProviderSchema(BaseModel):
    provider: Literal["analytic", "finite_difference"] = "analytic"
    step_scale: float = Field(default=1e-4, gt=0)
    order: Literal[2, 4] = 4


class MetricSpecSchema(BaseModel):
    family: str
    params: dict[str, float | list[float]] = Field(default_factory=dict)
    derivatives: DerivativeProviderSchema = Field(default_factory=DerivativeProviderSchema)
    interval: tuple[float, float] = (-5.0, 0.0)

    model_config = {"from_attributes": True}

    @field_validator("interval")
    @classmethod
    def validate_interval_field(cls, interval: tuple[float, float]) -> tuple[float, float]:
        validate_interval(interval)
        return interval


class AssumptionBudgetSchema(BaseModel):
    N0: float = Field(..., ge=1)
    K0: float = Field(..., gt=0)
    R0: float = Field(..., gt=0)
    I0: float = Field(..., gt=0)
    rho0: float = Field(..., gt=0)
    epsilon: float = Field(..., gt=0)
    r0: float = Field(..., gt=0)
    delta_star: float = Field(..., gt=0)
    delta0: float = Field(..., gt=0)
    epsilon0: float = Field(..., gt=0)
    varpi: float = Field(..., gt=0)

    model_config = {"from_attributes": True, "frozen": True}


class BasePointSchema(BaseModel):
    t: float
    x: list[float]
    chart_id: str = "main"

    @field_validator("x")
    @classmethod
    def validate_x(cls, x: list[float]) -> list[float]:
        validate_spatial_vector(x)
        return x


class TolerancesSchema(BaseModel):
    method: Literal["DOP853", "RK45", "Radau"] = "DOP853"
    rtol: float = Field(default=1e-10, gt=0)
    atol: float = Field(default=1e-12, gt=0)
    fixed_step: float | None = Field(default=None, gt=0)
    null_tol: float = Field(default=1e-9, gt=0)
    frame_tol: float = Field(default=1e-8, gt=0)
    transport_tol: float = Field(default=1e-6, gt=0)
    match_factor: float = Field(default=5.0, gt=0)


class EnergyOptionsSchema(BaseModel):
    t_range: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5])
    slice_resolution: int = Field(default=8, ge=2)
    cutoff_box: list[list[float]] | None = None
    rho: float = Field(default=0.3, gt=0)
    radii_per_octave: int = Field(default=4, ge=1)
    volume_points: list[list[float]] | None = None
    structural_constant: float | None = Field(default=None, gt=0)

    @field_validator("t_range")
    @classmethod
    def validate_t_range(cls, t_range: list[float]) -> list[float]:
        if len(t_range) < 1:
            raise ValueError("t_range needs at least one level.")
        validate_increasing(t_range, "t_range")
        return t_range

    @field_validator("cutoff_box")
    @classmethod
    def validate_box(cls, box: list[list[float]] | None) -> list[list[float]] | None:
        if box is not None:
            validate_cutoff_box(box)
        return box


class ScenarioSchema(BaseModel):
    name: str
    metric: MetricSpecSchema
    budget: AssumptionBudgetSchema
    base_points: list[BasePointSchema] = Field(..., min_length=1)
    grid_level: int = Field(default=4, ge=0, le=6)
    s_max: float = Field(default=3.0, gt=0)
    t_levels: list[float] | None = None
    level_count: int = Field(default=24, ge=2)
    delta_ladder: list[float] = Field(default_factory=lambda: [0.25, 0.5])
    ball_check_t: float | None = Field(default=None, lt=0)
    tolerances: TolerancesSchema = Field(default_factory=TolerancesSchema)
    energy: EnergyOptionsSchema | None = None
    scan_points: int = Field(default=0, ge=0)
    output_dir: str | None = None
    seed: int = 0

    model_config = {"from_attributes": True}

    @field_validator("t_levels")
    @classmethod
    def validate_t_levels(cls, t_levels: list[float] | None) -> list[float] | None:
        if t_levels is not None:
            validate_decreasing(t_levels, "t_levels")
        return t_levels

    @field_validator("delta_ladder")
    @classmethod
    def validate_delta_ladder(cls, ladder: list[float]) -> list[float]:
        if not ladder or any(delta <= 0 for delta in ladder):
            raise ValueError("delta_ladder needs positive entries.")
        validate_increasing(ladder, "delta_ladder")
        return ladder

    @model_validator(mode="after")
    def check_points_in_interval(self) -> "ScenarioSchema":
        t_min, t_max = self.metric.interval
        for point in self.base_points:
            if not t_min <= point.t <= t_max:
                raise ValueError(f"Base point time {point.t} lies outside the interval [{t_min}, {t_max}].")
        return self
