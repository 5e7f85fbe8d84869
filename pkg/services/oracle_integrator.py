"""
Brute-force grid integrator for

    i d psi/dt = (H0 + q sigma_x d chi/dz + q d chi/dt) psi

with the implicit midpoint (Crank-Nicolson) rule. Free H0 is handled exactly in
Fourier space, where (1 + i a H_k) is a 2x2 matrix with H_k^2 = (k^2 + m^2) 1;
the pulse term is resolved by fixed-point iteration or, optionally, GMRES on the
full step equation. Used only as an independent check of the closed-form
propagator: it shares grid primitives with it but no evolution code.
"""
import logging
import math
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.sparse.linalg import LinearOperator, gmres

from framework.errors import IntegratorError
from models.config import IntegratorConfig, SimConfig
from models.fields import GridField
from models.pulse import GaugePulse
from services.spectral_core import densities, grid_wavenumbers, h0_apply, sigma_x, spectral_derivative

logger = logging.getLogger(__name__)

STEP_BOUND = 0.5


class Trajectory(BaseModel):
    """Densities per unit charge, summed over the evolved states at every step, plus selected snapshots"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: np.ndarray
    rho: np.ndarray
    J: np.ndarray
    switch_index: int
    final: np.ndarray
    initial_norms: np.ndarray
    snapshot_times: List[float] = []
    snapshots: List[np.ndarray] = []
    L: float

    @property
    def norm_drift(self) -> float:
        final_norms = self.L / self.final.shape[-2] * np.sum(np.abs(self.final) ** 2, axis=(-2, -1))
        return float(np.max(np.abs(final_norms - self.initial_norms)))

    def snapshot(self, t: float) -> List[GridField]:
        for ts, samples in zip(self.snapshot_times, self.snapshots):
            if math.isclose(ts, t, abs_tol=1e-12):
                return [GridField(samples=s, L=self.L) for s in samples]
        raise KeyError(f"no snapshot recorded at t={t}")


def step_bound(pulse: GaugePulse, cfg: SimConfig, dt: float) -> float:
    """dt * (largest grid energy + q max|d chi/dt| + q max|d chi/dz|)"""
    k_max = float(np.max(np.abs(grid_wavenumbers(cfg))))
    e_max = math.hypot(k_max, cfg.m)
    window = np.linspace(pulse.t0, pulse.t1, 257)
    rate = max(abs(pulse.dg(t)) for t in window)
    chi_t = rate * float(np.max(np.abs(pulse.profile(cfg.z))))
    chi_z = float(np.max(np.abs(pulse.profile_dz(cfg.z))))
    return dt * (e_max + abs(pulse.q) * (chi_t + chi_z))


def _segment(start: float, stop: float, dt: float) -> Tuple[int, float]:
    steps = max(1, math.ceil((stop - start) / dt - 1e-9))
    return steps, (stop - start) / steps


class _MidpointStepper:
    """One implicit-midpoint step psi -> psi' over h at midpoint time t_mid"""

    def __init__(self, pulse: GaugePulse, cfg: SimConfig, icfg: IntegratorConfig):
        self.pulse = pulse
        self.cfg = cfg
        self.icfg = icfg
        k = grid_wavenumbers(cfg)
        self.k = k
        self.omega_sq = k * k + cfg.m * cfg.m

    def _free_matvec(self, F: np.ndarray, a: complex) -> np.ndarray:
        """(1 + a H_k) F on Fourier coefficients of shape (..., N, 2)"""
        out = np.empty_like(F)
        out[..., 0] = F[..., 0] + a * (self.cfg.m * F[..., 0] + self.k * F[..., 1])
        out[..., 1] = F[..., 1] + a * (self.k * F[..., 0] - self.cfg.m * F[..., 1])
        return out

    def _free_solve(self, F: np.ndarray, a: complex) -> np.ndarray:
        # (1 + a H)^-1 = (1 - a H) / (1 - a^2 omega^2)
        return self._free_matvec(F, -a) / (1 - a * a * self.omega_sq)[:, None]

    def _potential(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        z = self.cfg.z
        if t < self.pulse.t0 or t > self.pulse.t1:
            return np.zeros_like(z), np.zeros_like(z)
        return self.pulse.q * self.pulse.dchi_dt(z, t), self.pulse.q * self.pulse.dchi_dz(z, t)

    def _apply_v(self, psi: np.ndarray, scalar: np.ndarray, mixing: np.ndarray) -> np.ndarray:
        return scalar[:, None] * psi + mixing[:, None] * sigma_x(psi)

    def step(self, psi: np.ndarray, h: float, t_mid: float) -> np.ndarray:
        scalar, mixing = self._potential(t_mid)
        a = 0.5j * h
        if not (np.any(scalar) or np.any(mixing)):
            F = np.fft.fft(psi, axis=-2)
            return np.fft.ifft(self._free_solve(self._free_matvec(F, -a), a), axis=-2)
        if self.icfg.solver == "gmres":
            return self._step_gmres(psi, h, scalar, mixing)
        return self._step_fixed_point(psi, a, scalar, mixing)

    def _step_fixed_point(self, psi: np.ndarray, a: complex, scalar: np.ndarray, mixing: np.ndarray) -> np.ndarray:
        explicit = self._free_matvec(np.fft.fft(psi, axis=-2), -a) - a * np.fft.fft(self._apply_v(psi, scalar, mixing), axis=-2)
        guess = psi
        scale = 1.0 + float(np.max(np.abs(psi)))
        for _ in range(self.icfg.max_iter):
            rhs = explicit - a * np.fft.fft(self._apply_v(guess, scalar, mixing), axis=-2)
            update = np.fft.ifft(self._free_solve(rhs, a), axis=-2)
            change = float(np.max(np.abs(update - guess)))
            guess = update
            if change <= self.icfg.tol * scale:
                return guess
        raise IntegratorError(f"fixed-point solve did not converge in {self.icfg.max_iter} iterations "
                              f"(last change {change:.3e})")

    def _step_gmres(self, psi: np.ndarray, h: float, scalar: np.ndarray, mixing: np.ndarray) -> np.ndarray:
        shape = psi.shape[-2:]
        a = 0.5j * h
        out = np.empty_like(psi)
        for idx, state in enumerate(psi.reshape((-1,) + shape)):
            def matvec(x, sign=1.0):
                x = x.reshape(shape)
                hx = h0_apply(x, self.cfg) + self._apply_v(x, scalar, mixing)
                return (x + sign * a * hx).ravel()

            op = LinearOperator((state.size, state.size), matvec=matvec, dtype=complex)
            rhs = matvec(state.ravel(), sign=-1.0)
            solution, info = gmres(op, rhs, x0=state.ravel(), rtol=max(self.icfg.tol, 1e-12), atol=0.0,
                                   maxiter=self.icfg.max_iter)
            if info != 0:
                raise IntegratorError(f"GMRES step solve failed (info={info})")
            out.reshape((-1,) + shape)[idx] = solution.reshape(shape)
        return out


def integrate(
    psi0: Union[GridField, Sequence[GridField]],
    pulse: GaugePulse,
    cfg: SimConfig,
    icfg: IntegratorConfig,
    times: Sequence[float] = (),
) -> Trajectory:
    """
    Step every state from t0 to tf (window segment then free segment, each with a
    uniform step no larger than icfg.dt). Densities summed over the states are kept
    at every step; full states at `times` (and every icfg.sample_every steps).
    """
    fields = [psi0] if isinstance(psi0, GridField) else list(psi0)
    psi = np.stack([f.samples for f in fields]).astype(complex)
    if psi.shape[-2] != cfg.N:
        raise IntegratorError(f"grid field has {psi.shape[-2]} points, config expects {cfg.N}")

    bound = step_bound(pulse, cfg, icfg.dt)
    if bound >= STEP_BOUND:
        raise IntegratorError(f"step bound dt*(E_max + q|chi_t| + q|chi_z|) = {bound:.3f} "
                              f"is not below {STEP_BOUND}; reduce integrator.dt (now {icfg.dt})")

    n1, h1 = _segment(cfg.t0, cfg.t1, icfg.dt)
    n2, h2 = _segment(cfg.t1, cfg.tf, icfg.dt)
    step_times = np.concatenate([cfg.t0 + h1 * np.arange(n1 + 1), cfg.t1 + h2 * np.arange(1, n2 + 1)])
    logger.info(f"Integrating {psi.shape[0]} state(s): {n1} window steps of {h1:.3e}, {n2} free steps of {h2:.3e}")

    stepper = _MidpointStepper(pulse, cfg, icfg)
    rho = np.empty((step_times.size, cfg.N))
    J = np.empty((step_times.size, cfg.N))
    wanted = list(times)
    snap_times, snaps = [], []
    initial_norms = cfg.dz * np.sum(np.abs(psi) ** 2, axis=(-2, -1))

    for n, t in enumerate(step_times):
        if n > 0:
            h = h1 if n <= n1 else h2
            psi = stepper.step(psi, h, t - 0.5 * h)
        r, j = densities(psi, 1.0)
        rho[n], J[n] = r.sum(axis=0), j.sum(axis=0)
        sampled = icfg.sample_every and n % icfg.sample_every == 0
        requested = any(math.isclose(t, w, abs_tol=0.5 * min(h1, h2)) for w in wanted)
        if sampled or requested:
            snap_times.append(float(t))
            snaps.append(psi.copy())

    trajectory = Trajectory(
        times=step_times,
        rho=rho,
        J=J,
        switch_index=n1,
        final=psi,
        initial_norms=initial_norms,
        snapshot_times=snap_times,
        snapshots=snaps,
        L=cfg.L,
    )
    logger.debug(f"Norm drift over the run: {trajectory.norm_drift:.3e}")
    return trajectory


def continuity_residual(trajectory: Union[Trajectory, Sequence[Trajectory]], q: float, cfg: SimConfig) -> float:
    """
    max over (z, t) of |d rho/dt + dJ/dz|: centered differences in t, spectral derivative
    in z. Several trajectories on one time grid are summed first (an N-electron system).
    Stencils that straddle t1, where the pulse is cut off, are skipped.
    """
    runs = [trajectory] if isinstance(trajectory, Trajectory) else list(trajectory)
    times = runs[0].times
    for run in runs[1:]:
        if run.times.shape != times.shape or not np.allclose(run.times, times):
            raise IntegratorError("trajectories to be summed must share a time grid")
    rho = q * sum(run.rho for run in runs)
    J = q * sum(run.J for run in runs)

    centers = np.arange(1, times.size - 1)
    centers = centers[centers != runs[0].switch_index]
    drho = (rho[centers + 1] - rho[centers - 1]) / (times[centers + 1] - times[centers - 1])[:, None]
    dJ = spectral_derivative(J[centers], cfg)
    return float(np.max(np.abs(drho + dJ))) if centers.size else 0.0


def l2_distance(a: np.ndarray, b: np.ndarray, cfg: SimConfig) -> float:
    return float(np.sqrt(cfg.dz * np.sum(np.abs(a - b) ** 2)))


def dump_rows(trajectory: Trajectory, cfg: SimConfig, state: int = 0) -> np.ndarray:
    """Columns t, z, Re psi1, Im psi1, Re psi2, Im psi2, rho, J for every snapshot of one state"""
    rows = []
    for t, samples in zip(trajectory.snapshot_times, trajectory.snapshots):
        psi = samples[state]
        r, j = densities(psi, cfg.q)
        rows.append(np.column_stack([
            np.full(cfg.N, t), cfg.z,
            psi[:, 0].real, psi[:, 0].imag, psi[:, 1].real, psi[:, 1].imag,
            r, j,
        ]))
    return np.vstack(rows) if rows else np.empty((0, 8))
