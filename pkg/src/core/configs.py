"""Configuration management for hk-twistor.

This module provides:
- Numerical tolerances for every identity the pipeline certifies
- Finite-difference and sampling defaults for chart sweeps
- Application settings via Pydantic Settings (HK_* environment variables)
"""

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


# --- Numerical Configuration ---
class ToleranceSettings(BaseModel):
    """Tolerances used by the pointwise and chart-level checks."""

    rank: float = Field(
        default=1e-8,
        description="Relative singular-value cutoff for kernels and rank decisions",
    )
    identity: float = Field(
        default=1e-9,
        description="Quaternion relations, compatibility and metric identity chain",
    )
    algebra: float = Field(
        default=1e-10,
        description="J^2 = -1, reality of operators, pull-back and antipodal identities",
    )
    roundtrip: float = Field(
        default=1e-8, description="Relative error allowed when reconstructing a known model"
    )
    closedness: float = Field(
        default=1e-5, description="Largest |dF| component accepted on the numeric path"
    )
    nijenhuis: float = Field(
        default=1e-4, description="Largest Nijenhuis tensor component accepted"
    )
    section: float = Field(
        default=1e-10,
        description="Real-section type/reality and section-metric agreement (relative)",
    )
    o2_fit: float = Field(
        default=1e-7, description="Relative extrapolation error of the quadratic section fit"
    )
    direct_sum_condition: float = Field(
        default=1e12,
        description="Condition number above which two subspaces are not a direct sum",
    )
    pole_clearance: float = Field(
        default=1e-6,
        description="Smallest |denominator| allowed for rational fields on the box",
    )
    holosymp_volume: float = Field(
        default=1e-12,
        description="Threshold on |Omega^r ^ conj(Omega)^r| for holomorphic symplecticity",
    )


class FiniteDifferenceSettings(BaseModel):
    """Step sizes for derivatives of non-symbolic fields."""

    closedness_step: float = Field(default=1e-3, description="Step for dF")
    nijenhuis_step: float = Field(default=1e-4, description="Step for derivatives of J")
    order: int = Field(default=2, description="Central difference order (2 or 4)")


class SamplingSettings(BaseModel):
    """Seeded sampling of the twistor sphere."""

    seed: int = Field(default=0, description="Seed for numpy.random.default_rng")
    zeta_samples: int = Field(
        default=4, description="Random zeta values checked at every grid point"
    )
    nijenhuis_zetas: list[complex] = Field(
        default_factory=lambda: [0j, 1 + 0j, 1j, 2 + 0j],
        description="Zeta values at which integrability is checked",
    )
    nijenhuis_points: int | None = Field(
        default=None,
        description="Cap on interior grid points (evenly strided) for the Nijenhuis sweep; None for all",
    )
    modulus_min: float = Field(default=1e-2, description="Smallest sampled |zeta|")
    modulus_max: float = Field(default=1e2, description="Largest sampled |zeta|")


# --- Application Settings ---
class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="HK_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    # Logging
    log_level: str = Field(default="WARNING", description="Log level")
    log_file: str | None = Field(
        default=None, description="Optional rotating log file (stderr only when unset)"
    )

    # Parallel sweeps; HK_THREADS caps the worker count
    threads: int | None = Field(
        default=None, description="Maximum worker threads for grid sweeps"
    )

    tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
    finite_difference: FiniteDifferenceSettings = Field(
        default_factory=FiniteDifferenceSettings
    )
    sampling: SamplingSettings = Field(default_factory=SamplingSettings)


# Global settings instance
settings = Settings()
