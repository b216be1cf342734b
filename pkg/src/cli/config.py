"""
Run Configuration

Flat ``key = value`` run files parsed into a validated RunConfig. Every
field is also a command-line flag of the same name.
"""
import hashlib
import io
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from dotenv.parser import parse_stream
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.config import ToleranceConfig, settings
from src.hilbert.spaces import FockGeometry, SpinGeometry, SpinScheme, TensorGeometry
from src.models.params import ModelParams
from src.utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)

LIST_FIELDS = ("sigma_sweep", "formats", "ell_sweep", "checks")
OUTPUT_FORMATS = ("csv", "json", "svg")


class GridSpacing(str, Enum):
    LINEAR = "linear"
    LOG = "log"


class RunConfig(BaseModel):
    """Everything one CLI run needs: model, geometry, transform, grid, tolerances and output."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    # Model
    omega: float = Field(default=1.0, gt=0)
    mu: float = Field(default=0.7, gt=0)
    gamma: float = Field(default=0.3, ge=0)
    gamma_bar: float = Field(default=0.0, ge=0)
    lam: float = Field(default=0.2, alias="lambda")
    J: float = Field(default=0.5, ge=0)
    alpha_minus: float = Field(default=0.0, ge=0)
    alpha_plus: float = Field(default=0.0, ge=0)

    # Geometry
    fock_cutoff: int = Field(default=16, ge=1)
    spin_halfwidth: int = Field(default=16, ge=1)
    scheme: SpinScheme = SpinScheme.HARD
    margin_spin: Optional[int] = Field(default=None, ge=0)
    margin_fock: Optional[int] = Field(default=None, ge=0)

    # Transform
    sigma: float = Field(default=0.5, gt=0)
    sigma_sweep: List[float] = Field(default_factory=lambda: [0.3, 0.5, 1.0])

    # Time grid; t_end defaults to 20/γ
    t_start: float = Field(default=0.0, ge=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    points: int = Field(default=11, ge=2)
    spacing: GridSpacing = GridSpacing.LINEAR

    # Initial state |m) ⊗ |n⟩
    initial_spin: int = 0
    initial_photons: int = Field(default=1, ge=0)
    window: Optional[int] = Field(default=None, ge=0)

    # Experiments
    ell_sweep: List[int] = Field(default_factory=lambda: [10, 20, 40])
    ode_check: bool = True
    spectrum_decoupled: bool = False
    checks: Optional[List[str]] = None

    # Tolerances
    ode_rel: float = Field(default=1e-8, gt=0)
    ode_abs: float = Field(default=1e-10, gt=0)
    identity_tol: float = Field(default=1e-10, gt=0)
    trace_tol: float = Field(default=1e-10, gt=0)
    herm_tol: float = Field(default=1e-12, gt=0)
    psd_tol: float = Field(default=1e-8, gt=0)
    fd_step: float = Field(default=1e-4, gt=0)

    # Output
    seed: int = settings.seed
    out_dir: str = "results"
    formats: List[str] = Field(default_factory=lambda: ["csv", "json"])

    @field_validator(*LIST_FIELDS, mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("sigma_sweep")
    @classmethod
    def _positive_sweep(cls, value: List[float]) -> List[float]:
        if not value or any(s <= 0 for s in value):
            raise ValueError("sigma_sweep needs at least one value, all > 0")
        return value

    @field_validator("formats")
    @classmethod
    def _known_formats(cls, value: List[str]) -> List[str]:
        unknown = sorted(set(value) - set(OUTPUT_FORMATS))
        if unknown:
            raise ValueError(f"unknown output formats {unknown}; choose from {list(OUTPUT_FORMATS)}")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.t_end is not None and self.t_end <= self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if self.spacing is GridSpacing.LOG and self.t_start <= 0:
            raise ValueError("log spacing needs t_start > 0")
        if self.margin_spin is not None and self.margin_spin >= self.spin_halfwidth:
            raise ValueError("margin_spin must be smaller than spin_halfwidth")
        if self.margin_fock is not None and self.margin_fock >= self.fock_cutoff:
            raise ValueError("margin_fock must be smaller than fock_cutoff")
        if abs(self.initial_spin) > self.spin_halfwidth or self.initial_photons > self.fock_cutoff:
            raise ValueError("initial state lies outside the truncated space")
        return self

    def model_params(self) -> ModelParams:
        return ModelParams(
            omega=self.omega,
            mu=self.mu,
            gamma=self.gamma,
            gamma_bar=self.gamma_bar,
            lam=self.lam,
            J=self.J,
            alpha_minus=self.alpha_minus,
            alpha_plus=self.alpha_plus,
        )

    def geometry(self) -> TensorGeometry:
        return TensorGeometry(SpinGeometry(self.spin_halfwidth, self.scheme), FockGeometry(self.fock_cutoff))

    def margins(self) -> Tuple[int, int]:
        spin = self.spin_halfwidth // 4 if self.margin_spin is None else self.margin_spin
        fock = self.fock_cutoff // 4 if self.margin_fock is None else self.margin_fock
        return spin, fock

    def tolerances(self) -> ToleranceConfig:
        return ToleranceConfig(
            ode_rel=self.ode_rel,
            ode_abs=self.ode_abs,
            identity_tol=self.identity_tol,
            trace_tol=self.trace_tol,
            herm_tol=self.herm_tol,
            psd_tol=self.psd_tol,
            fd_step=self.fd_step,
        )

    def time_grid(self) -> np.ndarray:
        if self.t_end is not None:
            t_end = self.t_end
        elif self.gamma > 0:
            t_end = 20.0 / self.gamma
        else:
            raise InvalidParameterError("t_end must be set when gamma = 0")
        if self.spacing is GridSpacing.LOG:
            return np.geomspace(self.t_start, t_end, self.points)
        return np.linspace(self.t_start, t_end, self.points)

    def initial_state(self) -> np.ndarray:
        geo = self.geometry()
        index = geo.flat_index(self.initial_spin, self.initial_photons)
        rho = np.zeros((geo.dim, geo.dim), dtype=complex)
        rho[index, index] = 1.0
        return rho

    def config_hash(self) -> str:
        """sha256 of the canonical JSON dump."""
        canonical = json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_config_text(text: str, source: str = "<string>") -> Dict[str, str]:
    """
    Parse a flat ``key = value`` run file with python-dotenv's parser.

    Raises:
        InvalidParameterError: On a malformed, valueless or repeated key
    """
    values: Dict[str, str] = {}
    for binding in parse_stream(io.StringIO(text)):
        line = binding.original.line
        if binding.error:
            got = binding.original.string.strip()
            raise InvalidParameterError(f"{source}:{line}: expected 'key = value', got {got!r}")
        if binding.key is None:
            continue
        if binding.value is None:
            raise InvalidParameterError(f"{source}:{line}: key {binding.key!r} has no value")
        if binding.key in values:
            raise InvalidParameterError(f"{source}:{line}: duplicate key {binding.key!r}")
        values[binding.key] = binding.value
    return values


def load_run_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a RunConfig from an optional file plus overrides.

    Args:
        path: Run file; defaults apply when omitted
        overrides: Values that win over the file, typically command-line flags

    Returns:
        Validated RunConfig

    Raises:
        InvalidParameterError: If the file cannot be read or parsed
        pydantic.ValidationError: If a value is out of range; the location names the field
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise InvalidParameterError(f"cannot read run config {path}: {e}") from e
        data.update(parse_config_text(text, str(path)))
        logger.info(f"Loaded run config {path} ({len(data)} keys)")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return RunConfig.model_validate(data)


__all__ = ["RunConfig", "GridSpacing", "OUTPUT_FORMATS", "parse_config_text", "load_run_config"]
