import hashlib
import json
import math
import os
from pathlib import Path
from typing import List, Literal, Optional, Sequence

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator

from framework.errors import ConfigError

load_dotenv()

OUTPUT_DIR_ENV = "DIRAC_LAB_OUTPUT_DIR"


class SimConfig(BaseModel):
    """Mass, charge, periodic interval, mode cutoff, grid and time window (hbar = c = 1)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    m: float = Field(1.0, gt=0)
    q: float = 1.0
    L: float = Field(2 * math.pi, gt=0)
    R: int = Field(32, ge=1)
    N: int = 256
    t0: float = 0.0
    t1: float = 1.0
    tf: float = 1.5
    leakage_tol: float = Field(1e-8, gt=0)

    @field_validator("N")
    @classmethod
    def _grid_resolves_band(cls, n: int, info: ValidationInfo) -> int:
        R = info.data.get("R")
        if n % 2:
            raise ValueError("grid point count must be even")
        if R is not None and n < 8 * R:
            raise ValueError(f"N={n} must be >= 8R = {8 * R} (oversampling 4 over the retained band)")
        return n

    @field_validator("t1")
    @classmethod
    def _t1_after_t0(cls, t1: float, info: ValidationInfo) -> float:
        t0 = info.data.get("t0")
        if t0 is not None and not t1 > t0:
            raise ValueError(f"t1={t1} must be later than t0={t0}")
        return t1

    @field_validator("tf")
    @classmethod
    def _tf_after_t1(cls, tf: float, info: ValidationInfo) -> float:
        t1 = info.data.get("t1")
        if t1 is not None and not tf > t1:
            raise ValueError(f"tf={tf} must be later than t1={t1}")
        return tf

    @property
    def dz(self) -> float:
        return self.L / self.N

    @property
    def z(self) -> np.ndarray:
        """Grid points z_j = -L/2 + jL/N"""
        return -0.5 * self.L + self.dz * np.arange(self.N)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order"""
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dz)

    @property
    def evolution_cutoff(self) -> int:
        # quarter of the grid: the band between N/4 and N/2 is the aliasing guard
        return self.N // 4

    def momentum(self, r) -> np.ndarray:
        return 2 * np.pi * np.asarray(r) / self.L

    def energy(self, r) -> np.ndarray:
        p = self.momentum(r)
        return np.sqrt(p * p + self.m * self.m)

    def with_updates(self, **updates) -> "SimConfig":
        """Validated copy (model_copy skips validation)"""
        return SimConfig(**{**self.model_dump(), **updates})


class IntegratorConfig(BaseModel):
    """Implicit-midpoint step size and inner-solve settings"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(5e-4, gt=0)
    tol: float = Field(1e-14, gt=0)
    max_iter: int = Field(200, ge=1)
    solver: Literal["fixed_point", "gmres"] = "fixed_point"
    sample_every: int = Field(0, ge=0)


class PulseSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Literal["harmonics", "derived_from_current"] = "harmonics"
    cos: List[float] = Field(default_factory=lambda: [0.0, 0.3])
    sin: List[float] = Field(default_factory=list)
    envelope: Literal["sin2", "smoothstep"] = "sin2"
    lambdas: List[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0, 4.0, 8.0, 16.0])
    lambda_units: Literal["slope", "absolute"] = "slope"

    @property
    def harmonic_count(self) -> int:
        return max(len(self.cos), len(self.sin)) - 1


class PacketSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    r: int = 1
    s: int = 0

    @field_validator("s")
    @classmethod
    def _distinct(cls, s: int, info: ValidationInfo) -> int:
        if info.data.get("r") == s:
            raise ValueError("two-mode packet needs r != s")
        return s


class FockSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    R_F: int = Field(4, ge=1, le=8)
    P: Optional[int] = Field(2, ge=2)
    R_F_scan: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    z_points: List[float] = Field(default_factory=lambda: [0.0, 0.7, -1.9])
    random_states: int = Field(1000, ge=1)

    @field_validator("R_F_scan")
    @classmethod
    def _scan_in_range(cls, scan: List[int]) -> List[int]:
        if not scan or any(r < 1 or r > 8 for r in scan):
            raise ValueError("R_F_scan entries must lie in 1..8")
        return scan


class SweepSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    N: int = 1024
    cutoff_scan: List[int] = Field(default_factory=lambda: [8, 16, 32])
    cutoff_scan_lambda: float = 2.0


class ContinuitySection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    include_sea: bool = True
    dump: bool = False


class ToleranceSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    evolution_l2: float = 1e-6
    ratio_target: float = 4.0
    ratio_band: float = 0.5
    sweep_line: float = 1e-6
    vacuum_mode: float = 1e-10
    orthogonality: float = 1e-9
    schwinger_routes: float = 1e-12
    z_invariance: float = 1e-10


class OutputSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dir: Optional[str] = None


class RunConfig(BaseModel):
    """Everything one command needs; validated before any computation"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    sim: SimConfig = Field(default_factory=SimConfig)
    pulse: PulseSection = Field(default_factory=PulseSection)
    packet: PacketSection = Field(default_factory=PacketSection)
    fock: FockSection = Field(default_factory=FockSection)
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    sweep: SweepSection = Field(default_factory=SweepSection)
    continuity: ContinuitySection = Field(default_factory=ContinuitySection)
    tolerances: ToleranceSection = Field(default_factory=ToleranceSection)
    output: OutputSection = Field(default_factory=OutputSection)
    seed: int = 1234

    @model_validator(mode="after")
    def _cross_section_checks(self) -> "RunConfig":
        R = self.sim.R
        for key, r in (("packet.r", self.packet.r), ("packet.s", self.packet.s)):
            if abs(r) > R:
                raise ValueError(f"{key}={r} lies outside the mode cutoff sim.R={R}")
        if self.pulse.harmonic_count > R:
            raise ValueError(f"pulse.cos/pulse.sin carry {self.pulse.harmonic_count} harmonics, more than sim.R={R}")
        if self.sweep.N < 8 * R or self.sweep.N % 2:
            raise ValueError(f"sweep.N={self.sweep.N} must be even and >= 8 * sim.R")
        for cut in self.sweep.cutoff_scan:
            if cut < max(abs(self.packet.r), abs(self.packet.s)) or 8 * cut > self.sweep.N:
                raise ValueError(f"sweep.cutoff_scan entry {cut} must hold the packet and satisfy 8R <= sweep.N")
        return self

    @property
    def output_dir(self) -> Path:
        return Path(self.output.dir or os.getenv(OUTPUT_DIR_ENV, "out"))

    def sweep_sim(self) -> SimConfig:
        return self.sim.with_updates(N=self.sweep.N)

    def fingerprint(self, *sections: str) -> str:
        """Stable hash over the named sections (all sections when none given)"""
        payload = self.model_dump(include=set(sections) if sections else None, exclude={"output"})
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def load(
        cls,
        path: Optional[str] = None,
        overrides: Sequence[str] = (),
        output_dir: Optional[str] = None,
        seed: Optional[int] = None,
    ) -> "RunConfig":
        """Read the YAML file, apply `section.key=value` overrides and flags, validate"""
        data: dict = {}
        if path:
            try:
                with open(path, "r") as f:
                    data = yaml.safe_load(f) or {}
            except OSError as e:
                raise ConfigError(f"cannot read config file {path}: {e}", ["--config"])
            except yaml.YAMLError as e:
                raise ConfigError(f"config file {path} is not valid YAML: {e}", ["--config"])
            if not isinstance(data, dict):
                raise ConfigError(f"config file {path} must hold a mapping of sections", ["--config"])

        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override '{item}' is not of the form section.key=value", [item])
            dotted, raw = item.split("=", 1)
            parts = dotted.strip().split(".")
            node = data
            for part in parts[:-1]:
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise ConfigError(f"override '{dotted}' descends into a scalar", [dotted])
            node[parts[-1]] = yaml.safe_load(raw)

        if output_dir is not None:
            data.setdefault("output", {})["dir"] = output_dir
        if seed is not None:
            data["seed"] = seed

        try:
            return cls(**data)
        except ValidationError as e:
            keys = [".".join(str(p) for p in err["loc"]) or "<config>" for err in e.errors()]
            lines = [f"{key}: {err['msg']}" for key, err in zip(keys, e.errors())]
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines), keys)
