from typing import Callable, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from framework.errors import ConditionError, CutoffError


class GaugePulse(BaseModel):
    """
    Gauge function chi(z, t) = g(t) * chi1(z) switched on at t0 and off at t1.

    chi1 is a real trigonometric polynomial on the periodic interval:
        chi1(z) = sum_k cos_coeffs[k] cos(2 pi k z / L) + sin_coeffs[k] sin(2 pi k z / L)
    so it is L-periodic by construction. The envelope satisfies g(t0) = g'(t0) = 0
    and g(t1) = 1.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray
    L: float
    q: float = 1.0
    t0: float = 0.0
    t1: float = 1.0
    envelope: Literal["sin2", "smoothstep"] = "sin2"

    @field_validator("cos_coeffs", "sin_coeffs", mode="before")
    @classmethod
    def _as_real_harmonics(cls, value) -> np.ndarray:
        arr = np.atleast_1d(np.array(value, dtype=float))
        if arr.ndim != 1:
            raise ValueError("harmonic coefficients must be a flat list")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="before")
    @classmethod
    def _same_harmonic_count(cls, data):
        if isinstance(data, dict):
            cos_c = np.atleast_1d(np.array(data.get("cos_coeffs", [0.0]), dtype=float))
            sin_c = np.atleast_1d(np.array(data.get("sin_coeffs", [0.0]), dtype=float))
            K = max(cos_c.size, sin_c.size, 1)
            data = {**data,
                    "cos_coeffs": np.pad(cos_c, (0, K - cos_c.size)),
                    "sin_coeffs": np.pad(sin_c, (0, K - sin_c.size))}
        return data

    @model_validator(mode="after")
    def _window_ordered(self) -> "GaugePulse":
        if not self.t1 > self.t0:
            raise ValueError(f"pulse window needs t1 > t0, got ({self.t0}, {self.t1})")
        return self

    @property
    def K(self) -> int:
        return self.cos_coeffs.size - 1

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.cos_coeffs) or np.any(self.sin_coeffs))

    def check_band(self, R: int) -> None:
        if self.K > R:
            raise CutoffError(f"pulse carries harmonics up to {self.K}, beyond the mode cutoff {R}")

    def scaled(self, factor: float) -> "GaugePulse":
        return self.model_copy(update={"cos_coeffs": self.cos_coeffs * factor,
                                       "sin_coeffs": self.sin_coeffs * factor})

    @classmethod
    def from_profile(
        cls,
        profile: Union[Callable, np.ndarray],
        L: float,
        N: int,
        max_harmonic: int,
        tol: float = 1e-9,
        **window,
    ) -> "GaugePulse":
        """
        Fit the harmonics of a spatial profile, given as a callable or as N samples at
        z_j = -L/2 + jL/N. Profiles that do not close up over one period, or that carry
        harmonics above max_harmonic, are rejected.
        """
        z = -0.5 * L + L / N * np.arange(N)
        if callable(profile):
            ends = np.asarray(profile(np.array([-0.5 * L, 0.5 * L])), dtype=float)
            samples = np.asarray(profile(z), dtype=float)
            if abs(ends[1] - ends[0]) > tol * (1.0 + np.max(np.abs(samples))):
                raise ConditionError(f"profile is not periodic over L={L}: "
                                     f"chi1(-L/2)={ends[0]:.6g}, chi1(L/2)={ends[1]:.6g}")
        else:
            samples = np.asarray(profile, dtype=float)
            if samples.shape != (N,):
                raise CutoffError(f"expected {N} profile samples, got shape {samples.shape}")

        spectrum = np.fft.rfft(samples) / N
        k = np.arange(spectrum.size)
        # sample grid starts at -L/2, which shifts harmonic k by (-1)^k
        spectrum = spectrum * np.where(k % 2, -1.0, 1.0)
        scale = max(np.sqrt(np.mean(samples ** 2)), tol)
        tail = np.abs(spectrum[max_harmonic + 1:])
        if tail.size and np.max(tail) > tol * scale:
            raise CutoffError(f"profile carries harmonics beyond {max_harmonic} "
                              f"(largest {np.max(tail):.3g}) or is not periodic")

        head = spectrum[:max_harmonic + 1]
        cos_c = 2 * head.real
        sin_c = -2 * head.imag
        cos_c[0] = head[0].real
        sin_c[0] = 0.0
        cos_c[np.abs(cos_c) <= tol * scale] = 0.0
        sin_c[np.abs(sin_c) <= tol * scale] = 0.0
        nonzero = np.flatnonzero((cos_c != 0) | (sin_c != 0))
        K = int(nonzero[-1]) if nonzero.size else 0
        cos_c, sin_c = cos_c[:K + 1], sin_c[:K + 1]
        return cls(cos_coeffs=cos_c, sin_coeffs=sin_c, L=L, **window)

    # spatial profile

    def _phases(self, z) -> np.ndarray:
        k = np.arange(self.K + 1)
        return 2 * np.pi * np.outer(np.asarray(z, dtype=float), k) / self.L

    def profile(self, z) -> np.ndarray:
        ph = self._phases(z)
        return np.cos(ph) @ self.cos_coeffs + np.sin(ph) @ self.sin_coeffs

    def profile_dz(self, z) -> np.ndarray:
        ph = self._phases(z)
        w = 2 * np.pi * np.arange(self.K + 1) / self.L
        return np.cos(ph) @ (w * self.sin_coeffs) - np.sin(ph) @ (w * self.cos_coeffs)

    # time envelope

    def _s(self, t: float) -> float:
        return float(np.clip((t - self.t0) / (self.t1 - self.t0), 0.0, 1.0))

    def g(self, t: float) -> float:
        s = self._s(t)
        if self.envelope == "sin2":
            return float(np.sin(0.5 * np.pi * s) ** 2)
        return 3 * s * s - 2 * s ** 3

    def dg(self, t: float) -> float:
        if t < self.t0 or t > self.t1:
            return 0.0
        s = self._s(t)
        T = self.t1 - self.t0
        if self.envelope == "sin2":
            return float(0.5 * np.pi / T * np.sin(np.pi * s))
        return (6 * s - 6 * s * s) / T

    # gauge function and its derivatives

    def chi(self, z, t: float) -> np.ndarray:
        return self.g(t) * self.profile(z)

    def dchi_dz(self, z, t: float) -> np.ndarray:
        return self.g(t) * self.profile_dz(z)

    def dchi_dt(self, z, t: float) -> np.ndarray:
        return self.dg(t) * self.profile(z)

    def potential(self, z, t: float) -> "PulsePotential":
        return PulsePotential.of(self, z, t)


class PulsePotential(BaseModel):
    """(A0, Az) = (d chi/dt, -d chi/dz) inside [t0, t1], identically zero outside"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    A0: np.ndarray
    Az: np.ndarray
    t: float

    @classmethod
    def of(cls, pulse: GaugePulse, z, t: float) -> "PulsePotential":
        z = np.asarray(z, dtype=float)
        if t < pulse.t0 or t > pulse.t1:
            zero = np.zeros_like(z)
            return cls(A0=zero, Az=zero.copy(), t=t)
        return cls(A0=pulse.dchi_dt(z, t), Az=-pulse.dchi_dz(z, t), t=t)

    @classmethod
    def zero(cls, z) -> "PulsePotential":
        z = np.asarray(z, dtype=float)
        return cls(A0=np.zeros_like(z), Az=np.zeros_like(z), t=0.0)

    @classmethod
    def constant(cls, z, a0: float = 0.0, az: float = 0.0) -> "PulsePotential":
        z = np.asarray(z, dtype=float)
        return cls(A0=np.full_like(z, a0), Az=np.full_like(z, az), t=0.0)
