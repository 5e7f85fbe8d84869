import math
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from framework.errors import CutoffError

# row of ModeExpansion.coeffs for each energy sign
SIGN_ROW = {+1: 0, -1: 1}


class PlaneWaveMode(BaseModel):
    """One free solution u exp(-i(eps0 t - p z)) of the periodic Dirac equation"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r: int
    lam: int
    p: float
    E: float
    u: np.ndarray
    L: float

    @property
    def eps0(self) -> float:
        """Signed energy lam * E"""
        return self.lam * self.E


class ModeExpansion(BaseModel):
    """
    A single-particle state as complex coefficients over the modes |r| <= R.
    coeffs[0, r + R] belongs to lam = +1 and coeffs[1, r + R] to lam = -1.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def _as_complex_table(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != 2 or arr.shape[1] % 2 != 1:
            raise ValueError(f"coefficient table must have shape (2, 2R+1), got {arr.shape}")
        arr.setflags(write=False)
        return arr

    @property
    def R(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def r(self) -> np.ndarray:
        return np.arange(-self.R, self.R + 1)

    @classmethod
    def zeros(cls, R: int) -> "ModeExpansion":
        return cls(coeffs=np.zeros((2, 2 * R + 1), dtype=complex))

    @classmethod
    def from_dict(cls, R: int, entries: Dict[Tuple[int, int], complex]) -> "ModeExpansion":
        """Build from {(lam, r): c}; every r must satisfy |r| <= R"""
        table = np.zeros((2, 2 * R + 1), dtype=complex)
        for (lam, r), c in entries.items():
            if lam not in SIGN_ROW:
                raise CutoffError(f"energy sign must be +1 or -1, got {lam}")
            if abs(r) > R:
                raise CutoffError(f"mode r={r} outside cutoff R={R}")
            table[SIGN_ROW[lam], r + R] = c
        return cls(coeffs=table)

    @classmethod
    def single(cls, R: int, lam: int, r: int) -> "ModeExpansion":
        return cls.from_dict(R, {(lam, r): 1.0})

    def coeff(self, lam: int, r: int) -> complex:
        if abs(r) > self.R:
            return 0j
        return complex(self.coeffs[SIGN_ROW[lam], r + self.R])

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def embed(self, R: int) -> "ModeExpansion":
        """Same state on a wider band (zero padding)"""
        if R < self.R:
            raise CutoffError(f"cannot embed cutoff {self.R} into narrower cutoff {R}")
        pad = R - self.R
        return ModeExpansion(coeffs=np.pad(self.coeffs, ((0, 0), (pad, pad))))


class GridField(BaseModel):
    """Two-component spinor samples at z_j = -L/2 + jL/N, shape (N, 2)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray
    L: float

    @field_validator("samples", mode="before")
    @classmethod
    def _as_spinor_samples(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=complex)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"grid samples must have shape (N, 2), got {arr.shape}")
        arr.setflags(write=False)
        return arr

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    def norm_sq(self) -> float:
        return float(self.L / self.N * np.sum(np.abs(self.samples) ** 2))


class PositivePacket(BaseModel):
    """Normalized electron wave packet built only from positive-energy modes"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: np.ndarray

    @field_validator("f", mode="before")
    @classmethod
    def _normalized_amplitudes(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=complex)
        if arr.ndim != 1 or arr.size % 2 != 1:
            raise ValueError(f"packet amplitudes must have length 2R+1, got shape {arr.shape}")
        norm = float(np.sum(np.abs(arr) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"packet amplitudes must be normalized, sum |f_r|^2 = {norm}")
        arr.setflags(write=False)
        return arr

    @property
    def R(self) -> int:
        return (self.f.size - 1) // 2

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.f) - self.R

    def expansion(self, R: int = None) -> ModeExpansion:
        table = np.zeros((2, self.f.size), dtype=complex)
        table[SIGN_ROW[+1]] = self.f
        x = ModeExpansion(coeffs=table)
        return x if R is None else x.embed(R)

    def resized(self, R: int) -> "PositivePacket":
        """Same packet over the cutoff R; the support must fit"""
        if self.support.size and np.max(np.abs(self.support)) > R:
            raise CutoffError(f"packet support reaches |r|={np.max(np.abs(self.support))}, beyond cutoff {R}")
        f = np.zeros(2 * R + 1, dtype=complex)
        f[self.support + R] = self.f[self.support + self.R]
        return PositivePacket(f=f)


class VacuumSet(BaseModel):
    """The filled negative-energy sea: one electron in every mode (-1, r), |r| <= R"""
    model_config = ConfigDict(frozen=True)

    R: int = Field(ge=1)

    @property
    def r(self) -> np.ndarray:
        return np.arange(-self.R, self.R + 1)

    def orbitals(self, R: int = None) -> np.ndarray:
        """Coefficient tables of every occupied orbital, shape (2R+1, 2, 2R'+1)"""
        width = self.R if R is None else R
        if width < self.R:
            raise CutoffError(f"sea of cutoff {self.R} does not fit in cutoff {width}")
        stack = np.zeros((2 * self.R + 1, 2, 2 * width + 1), dtype=complex)
        stack[np.arange(2 * self.R + 1), SIGN_ROW[-1], self.r + width] = 1.0
        return stack

    def unperturbed_energy(self, energies: np.ndarray) -> float:
        """E_hvac0 = -sum E_r over the retained modes"""
        return -math.fsum(np.asarray(energies, dtype=float))
