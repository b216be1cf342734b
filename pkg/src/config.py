"""
OISD Lab Configuration Management

Loads environment variables and provides centralized config access.
"""
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class ToleranceConfig(BaseModel):
    """Numerical tolerances shared by integrators and density checks."""

    ode_rel: float = 1e-8
    ode_abs: float = 1e-10
    identity_tol: float = 1e-10
    trace_tol: float = 1e-10
    herm_tol: float = 1e-12
    psd_tol: float = 1e-8
    rho_star_psd_tol: float = 1e-6
    cross_check_tol: float = 1e-6
    fd_step: float = 1e-4

    @field_validator("*")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tolerances must be positive")
        return value


class Settings(BaseSettings):
    """Application settings from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="OISD_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",  # Ignore extra environment variables
    )

    # Logging
    log_level: str = "INFO"
    debug_mode: bool = False

    # Reproducibility
    seed: int = 20240611

    # Dense linear algebra
    dense_dim_limit: int = Field(default=100, ge=1)  # operator dimension; superoperators are dim² wide
    max_condition: float = 1e12  # refuse inverses of V(sigma) beyond this estimate

    # Series and residual samples
    spin_series_eps: float = 1e-14
    sample_count: int = Field(default=4, ge=1)
    sample_radius: int = Field(default=1, ge=0)

    # Decoupling transform
    default_sigma: float = Field(default=0.5, gt=0)

    tolerances: ToleranceConfig = ToleranceConfig()

    @property
    def dense_matrix_limit(self) -> int:
        """Largest matrix side accepted by the dense expm oracle."""
        return self.dense_dim_limit ** 2


# Global settings instance
settings = Settings()

__all__ = ["settings", "Settings", "ToleranceConfig"]
