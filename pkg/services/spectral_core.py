"""
Free plane-wave basis of the 1+1D Dirac equation on a periodic interval,
the two representations of a single-particle state (mode coefficients and
grid samples), the transforms between them and the energy, charge and
current functionals.

H0 = -i sigma_x d/dz + m sigma_z. Mode (lam, r) is u_{lam,r} exp(i p_r z) with
p_r = 2 pi r / L and signed energy lam * E_r, E_r = sqrt(p_r^2 + m^2).
"""
import logging
from typing import Tuple, Union

import numpy as np

from framework.errors import CutoffError
from models.config import SimConfig
from models.fields import SIGN_ROW, GridField, ModeExpansion, PlaneWaveMode
from models.pulse import PulsePotential

logger = logging.getLogger(__name__)


def spinors(cfg: SimConfig, r) -> Tuple[np.ndarray, np.ndarray]:
    """
    Spinor amplitudes (u_{+1,r}, u_{-1,r}) for an array of mode indices, each of shape (len(r), 2).

    u_{+1} = N+ (1, p/(E+m)), N+ = sqrt((E+m)/(2LE)).
    u_{-1} is written as (sqrt((E-m)/(2LE)), -sign(p) sqrt((E+m)/(2LE))), which equals
    N- (1, p/(m-E)) for p != 0 without the 0/0 at p = 0, where it becomes (0, 1/sqrt(L)).
    """
    r = np.atleast_1d(np.asarray(r))
    p = cfg.momentum(r)
    E = cfg.energy(r)
    m, L = cfg.m, cfg.L

    n_plus = np.sqrt((E + m) / (2 * L * E))
    u_plus = np.stack([n_plus, n_plus * p / (E + m)], axis=-1).astype(complex)

    upper = np.sqrt(np.maximum(E - m, 0.0) / (2 * L * E))
    lower = -np.sign(p) * np.sqrt((E + m) / (2 * L * E))
    lower = np.where(p == 0, 1 / np.sqrt(L), lower)
    u_minus = np.stack([upper, lower], axis=-1).astype(complex)
    return u_plus, u_minus


def spinor_table(cfg: SimConfig, R: int) -> np.ndarray:
    """Spinors of every mode |r| <= R, shape (2, 2R+1, 2), rows ordered like ModeExpansion.coeffs"""
    u_plus, u_minus = spinors(cfg, np.arange(-R, R + 1))
    return np.stack([u_plus, u_minus])


def signed_energies(cfg: SimConfig, R: int) -> np.ndarray:
    """lam * E_r for every mode |r| <= R, shape (2, 2R+1)"""
    E = cfg.energy(np.arange(-R, R + 1))
    return np.stack([E, -E])


def make_mode(r: int, lam: int, cfg: SimConfig) -> PlaneWaveMode:
    if lam not in SIGN_ROW:
        raise CutoffError(f"energy sign must be +1 or -1, got {lam}")
    if abs(r) > cfg.R:
        raise CutoffError(f"mode r={r} outside cutoff R={cfg.R}")
    u_plus, u_minus = spinors(cfg, [r])
    u = (u_plus if lam == 1 else u_minus)[0]
    return PlaneWaveMode(r=r, lam=lam, p=float(cfg.momentum(r)), E=float(cfg.energy(r)), u=u, L=cfg.L)


def _check_band(R: int, cfg: SimConfig) -> None:
    if R > cfg.N // 2 - 1:
        raise CutoffError(f"cutoff {R} does not fit on a grid of {cfg.N} points")


def _offset_signs(k: np.ndarray) -> np.ndarray:
    # exp(i p_k z_0) with z_0 = -L/2
    return np.where(np.asarray(k) % 2, -1.0, 1.0)


def spinor_amplitudes(x: ModeExpansion, cfg: SimConfig, t: float = 0.0) -> np.ndarray:
    """Fourier amplitudes a_r = sum_lam c_{lam,r} exp(-i lam E_r t) u_{lam,r}, shape (2R+1, 2)"""
    phases = np.exp(-1j * signed_energies(cfg, x.R) * t)
    U = spinor_table(cfg, x.R)
    return np.einsum("lr,lrc->rc", x.coeffs * phases, U)


def synthesize(amplitudes: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Grid samples sum_r a_r exp(i p_r z_j) from band amplitudes of shape (..., 2R+1, 2)"""
    R = (amplitudes.shape[-2] - 1) // 2
    _check_band(R, cfg)
    r = np.arange(-R, R + 1)
    table = np.zeros(amplitudes.shape[:-2] + (cfg.N, 2), dtype=complex)
    table[..., r % cfg.N, :] = amplitudes * _offset_signs(r)[:, None]
    return cfg.N * np.fft.ifft(table, axis=-2)


def analyze(samples: np.ndarray, cfg: SimConfig, R: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Band amplitudes a_r for |r| <= R from grid samples of shape (..., N, 2),
    and the squared norm L * sum |a_k|^2 found outside the band.
    """
    _check_band(R, cfg)
    spectrum = np.fft.fft(samples, axis=-2) / cfg.N
    k = np.rint(np.fft.fftfreq(cfg.N) * cfg.N).astype(int)
    spectrum = spectrum * _offset_signs(k)[:, None]
    outside = np.abs(k) > R
    leakage = cfg.L * np.sum(np.abs(spectrum[..., outside, :]) ** 2, axis=(-2, -1))
    r = np.arange(-R, R + 1)
    return spectrum[..., r % cfg.N, :], leakage


def to_grid(x: ModeExpansion, cfg: SimConfig, t: float = 0.0) -> GridField:
    """psi(z_j) = sum c_{lam,r} u_{lam,r} exp(-i(eps t - p_r z_j))"""
    samples = synthesize(spinor_amplitudes(x, cfg, t), cfg)
    return GridField(samples=samples, L=cfg.L)


def coefficients_from_amplitudes(amplitudes: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Project band amplitudes (..., 2R+1, 2) onto the mode spinors: c = L u^dagger a"""
    R = (amplitudes.shape[-2] - 1) // 2
    U = spinor_table(cfg, R)
    return cfg.L * np.einsum("lrc,...rc->...lr", U.conj(), amplitudes)


def to_modes(f: GridField, cfg: SimConfig, cutoff: int = None) -> Tuple[ModeExpansion, float]:
    """
    Mode coefficients c_{lam,r} = <phi_{lam,r}, f> for |r| <= cutoff (default cfg.R).
    Returns the expansion and the discarded out-of-band squared norm.
    """
    if f.N != cfg.N or not np.isclose(f.L, cfg.L):
        raise CutoffError(f"grid field (N={f.N}, L={f.L}) does not match config (N={cfg.N}, L={cfg.L})")
    R = cfg.R if cutoff is None else cutoff
    amplitudes, leakage = analyze(f.samples, cfg, R)
    coeffs = coefficients_from_amplitudes(amplitudes, cfg)
    return ModeExpansion(coeffs=coeffs), float(leakage)


def inner_product(a: Union[GridField, ModeExpansion], b: Union[GridField, ModeExpansion]) -> complex:
    """Integral of psi_a^dagger psi_b (grid quadrature, or coefficient dot product)"""
    if isinstance(a, ModeExpansion) and isinstance(b, ModeExpansion):
        if a.R != b.R:
            raise CutoffError(f"expansions over different cutoffs ({a.R} vs {b.R})")
        return complex(np.vdot(a.coeffs, b.coeffs))
    if isinstance(a, GridField) and isinstance(b, GridField):
        if a.N != b.N or not np.isclose(a.L, b.L):
            raise CutoffError(f"grid fields of different size ({a.N}, {b.N})")
        return complex(a.L / a.N * np.vdot(a.samples, b.samples))
    raise CutoffError("inner product needs two states in the same representation")


def grid_wavenumbers(cfg: SimConfig) -> np.ndarray:
    """Angular wavenumbers in FFT order with the Nyquist entry zeroed"""
    k = cfg.k.copy()
    k[cfg.N // 2] = 0.0
    return k


def spectral_derivative(values: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """d/dz along the last axis by discrete Fourier differentiation"""
    out = np.fft.ifft(1j * grid_wavenumbers(cfg) * np.fft.fft(values, axis=-1), axis=-1)
    return out.real if np.isrealobj(values) else out


def h0_apply(samples: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """H0 acting on grid spinors of shape (..., N, 2), derivative taken spectrally"""
    k = grid_wavenumbers(cfg)
    F = np.fft.fft(samples, axis=-2)
    out = np.empty_like(F)
    out[..., 0] = cfg.m * F[..., 0] + k * F[..., 1]
    out[..., 1] = k * F[..., 0] - cfg.m * F[..., 1]
    return np.fft.ifft(out, axis=-2)


def apply_h0(f: GridField, cfg: SimConfig) -> GridField:
    return GridField(samples=h0_apply(f.samples, cfg), L=f.L)


def sigma_x(samples: np.ndarray) -> np.ndarray:
    return samples[..., ::-1]


def free_energy(x: ModeExpansion, cfg: SimConfig) -> float:
    """sum lam E_r |c_{lam,r}|^2"""
    return float(np.sum(signed_energies(cfg, x.R) * np.abs(x.coeffs) ** 2))


def grid_free_energy(f: GridField, cfg: SimConfig) -> float:
    """Integral of psi^dagger H0 psi by grid quadrature"""
    return full_energy(f, PulsePotential.zero(cfg.z), cfg)


def full_energy(f: GridField, pot: PulsePotential, cfg: SimConfig) -> float:
    """Integral of psi^dagger (H0 + q(A0 - sigma_x Az)) psi by grid quadrature"""
    psi = f.samples
    h_psi = h0_apply(psi, cfg)
    h_psi = h_psi + cfg.q * (pot.A0[:, None] * psi - pot.Az[:, None] * sigma_x(psi))
    return float(np.real(cfg.dz * np.vdot(psi, h_psi)))


def charge_current_density(f: GridField, q: float) -> Tuple[np.ndarray, np.ndarray]:
    """rho = q psi^dagger psi, J = q psi^dagger sigma_x psi"""
    return densities(f.samples, q)


def densities(samples: np.ndarray, q: float) -> Tuple[np.ndarray, np.ndarray]:
    rho = q * np.sum(np.abs(samples) ** 2, axis=-1)
    J = 2 * q * np.real(np.conj(samples[..., 0]) * samples[..., 1])
    return rho, J


def quadrature(values: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Uniform-grid Riemann sum over the last axis"""
    return cfg.dz * np.sum(values, axis=-1)
