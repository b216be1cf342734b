"""
Model Parameters

Validated parameter set shared by every Liouvillian builder and propagator.
"""
import math

from pydantic import BaseModel, ConfigDict, Field

from src.utils.errors import InvalidParameterError


class ModelParams(BaseModel):
    """Oscillator, spin and coupling constants of the OISD family."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    omega: float = Field(default=1.0, gt=0, description="Oscillator angular frequency")
    mu: float = Field(default=0.7, gt=0, description="Spin frequency")
    gamma: float = Field(default=0.3, ge=0, description="Oscillator dissipation")
    gamma_bar: float = Field(default=0.0, ge=0, description="Spin dissipation of the general model")
    lam: float = Field(default=0.2, alias="lambda", description="Coupling constant")
    J: float = Field(default=0.5, ge=0, description="Bath parameter")
    alpha_minus: float = Field(default=0.0, ge=0, description="Standalone spin lowering rate")
    alpha_plus: float = Field(default=0.0, ge=0, description="Standalone spin raising rate")

    @property
    def detuning(self) -> float:
        """ω - μ."""
        return self.omega - self.mu

    @property
    def delta(self) -> float:
        """δ = λ / (γ² + (ω-μ)²)."""
        denominator = self.gamma ** 2 + self.detuning ** 2
        if denominator == 0:
            raise InvalidParameterError("delta is undefined for gamma = 0 and omega = mu")
        return self.lam / denominator

    @property
    def induced_dissipation(self) -> float:
        """λγδ, the spin dissipation the coupling induces."""
        return self.lam * self.gamma * self.delta

    @property
    def beta(self) -> float:
        """Inverse temperature with e^{-βω} = J/(J+1)."""
        if self.J == 0:
            return math.inf
        return math.log1p(1.0 / self.J) / self.omega

    def require_oscillator_dissipation(self) -> None:
        if not self.gamma > 0:
            raise InvalidParameterError(f"gamma must be > 0 for this model, got {self.gamma}")

    def with_updates(self, **changes) -> "ModelParams":
        """Copy with fields replaced and re-validated."""
        data = self.model_dump(by_alias=True)
        data.update({("lambda" if k == "lam" else k): v for k, v in changes.items()})
        return ModelParams.model_validate(data)


__all__ = ["ModelParams"]
