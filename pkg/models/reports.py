from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from framework.errors import ToleranceError
from models.fields import ModeExpansion


class EvolutionResult(BaseModel):
    """Final state of the exact propagator plus the norm discarded by the projection"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    state: ModeExpansion
    leakage: float


class VacuumShift(BaseModel):
    """Per-mode energy shifts of the filled sea and their sum"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r: np.ndarray
    per_mode: np.ndarray
    total: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.per_mode))) if self.per_mode.size else 0.0


class HTEnergyReport(BaseModel):
    """Energies of the sea-plus-packet system relative to the unperturbed sea"""
    model_config = ConfigDict(frozen=True)

    lam: float
    E_TR_t0: float
    dE_hvac: float
    d_xi_fp: float
    E_TR_tf: float
    predicted: float
    leakage: float

    @property
    def abs_diff(self) -> float:
        return abs(self.E_TR_tf - self.predicted)

    @property
    def identity_residual(self) -> float:
        return abs(self.E_TR_tf - (self.E_TR_t0 + self.d_xi_fp + self.dE_hvac))


class SchwingerRow(BaseModel):
    """Schwinger-term value at one Fock cutoff"""
    model_config = ConfigDict(frozen=True)

    R_F: int
    S_spectral: float
    S_direct: float
    dim: int
    z_spread: float = 0.0

    @property
    def abs_diff(self) -> float:
        return abs(self.S_spectral - self.S_direct)


class ContinuityViolationReport(BaseModel):
    """Which operator relations needed for a field-theory continuity equation hold on the truncated space"""
    model_config = ConfigDict(frozen=True)

    R_F: int
    dim: int
    schwinger: float
    derivative_route: float
    rho_vacuum: float
    rho_rho_vacuum: float
    h0_rho_residual: float
    current_rho_holds: bool
    rho_rho_holds: bool


class ContinuityRow(BaseModel):
    """Continuity residual of one grid trajectory at one step size"""
    model_config = ConfigDict(frozen=True)

    dt: float
    packet: float
    sea: Optional[float] = None


class CommandResult(BaseModel):
    """Outcome of one CLI command: exit code, printable summary and the files it wrote"""
    exit_code: int = 0
    summary: List[str] = Field(default_factory=list)
    files: Dict[str, str] = Field(default_factory=dict)

    def line(self, text: str) -> None:
        self.summary.append(text)

    def fail(self, error: Exception) -> None:
        self.exit_code = 2
        self.summary.append(f"FAIL {error}")

    def require(self, name: str, measured: float, tolerance: float, passed: Optional[bool] = None,
                detail: str = "") -> bool:
        """Record one tolerance check; by default it passes when measured <= tolerance"""
        ok = measured <= tolerance if passed is None else passed
        if ok:
            self.summary.append(f"ok   {name}: {measured:.6e} (tolerance {tolerance:.1e})")
        else:
            self.fail(ToleranceError(name, measured, tolerance, detail))
        return ok
