"""
Truncated second-quantized Dirac field.

Electron modes b_r and positron modes d_r, |r| <= R_F, are laid out on one
Jordan-Wigner chain (b modes first, then d modes). A basis state is an
occupation bit pattern; the space may be capped at P particles.

The field operator is psi(z) = sum_r b_r phi_{+1,r}(z) + d_r^dagger phi_{-1,r}(z),
so the bilinears of psi^dagger M psi fall into the four blocks
b^dagger b, b^dagger d^dagger, d b and d d^dagger. The last block is assembled
as delta - d^dagger d so that a particle cap never clips an intermediate state.
"""
import logging
from itertools import combinations
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps

from framework.errors import CutoffError
from models.config import SimConfig
from models.fields import SIGN_ROW
from models.reports import ContinuityViolationReport, SchwingerRow
from services.spectral_core import spinor_table

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
IDENTITY = np.eye(2)

# the full occupation space is built only up to this many modes
MAX_FULL_MODES = 20


def _popcount(states: np.ndarray, n_modes: int) -> np.ndarray:
    count = np.zeros_like(states)
    for k in range(n_modes):
        count += (states >> k) & 1
    return count


class FockBasis:
    """Occupation-number basis over the electron and positron modes |r| <= R_F"""

    def __init__(self, R_F: int, P: Optional[int] = None):
        if R_F < 1:
            raise CutoffError(f"Fock cutoff must be >= 1, got {R_F}")
        self.R_F = R_F
        self.P = P
        self.n_modes = 2 * (2 * R_F + 1)
        if P is None and self.n_modes > MAX_FULL_MODES:
            raise CutoffError(f"full Fock space over {self.n_modes} modes is too large; set a particle cap P")

        cap = self.n_modes if P is None else min(P, self.n_modes)
        patterns = [sum(1 << j for j in occupied)
                    for k in range(cap + 1)
                    for occupied in combinations(range(self.n_modes), k)]
        self.states = np.array(sorted(patterns), dtype=np.int64)
        self.occupancy = _popcount(self.states, self.n_modes)
        self._creation = {}
        self.bilinears = {}
        logger.debug(f"Fock basis R_F={R_F}, P={P}: {self.n_modes} modes, dimension {self.dim}")

    @property
    def dim(self) -> int:
        return self.states.size

    @property
    def r(self) -> np.ndarray:
        return np.arange(-self.R_F, self.R_F + 1)

    def expected_dim(self) -> int:
        cap = self.n_modes if self.P is None else min(self.P, self.n_modes)
        return sum(comb(self.n_modes, k) for k in range(cap + 1))

    def b_index(self, r: int) -> int:
        self._check_mode(r)
        return r + self.R_F

    def d_index(self, r: int) -> int:
        self._check_mode(r)
        return (2 * self.R_F + 1) + r + self.R_F

    def _check_mode(self, r: int) -> None:
        if abs(r) > self.R_F:
            raise CutoffError(f"mode r={r} outside Fock cutoff R_F={self.R_F}")

    def index(self, pattern: int) -> int:
        pos = int(np.searchsorted(self.states, pattern))
        if pos >= self.dim or self.states[pos] != pattern:
            raise CutoffError(f"occupation pattern {pattern:b} is not in the truncated basis")
        return pos

    def creation(self, j: int) -> sps.csr_matrix:
        """c_j^dagger with the Jordan-Wigner sign (-1)^(occupied modes below j); clipped at the cap"""
        if j not in self._creation:
            bit = np.int64(1) << j
            free = (self.states & bit) == 0
            if self.P is not None:
                free &= self.occupancy < self.P
            src = np.flatnonzero(free)
            tgt = np.searchsorted(self.states, self.states[src] | bit)
            below = _popcount(self.states[src] & (bit - 1), self.n_modes)
            sign = np.where(below % 2, -1.0, 1.0)
            self._creation[j] = sps.csr_matrix((sign, (tgt, src)), shape=(self.dim, self.dim))
        return self._creation[j]

    def annihilation(self, j: int) -> sps.csr_matrix:
        return self.creation(j).T.tocsr()

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def state(self, *created: Tuple[str, int]) -> np.ndarray:
        """
        Apply creators right to left to the vacuum: state(("b", r), ("d", s)) is
        b_r^dagger d_s^dagger |0>.
        """
        v = self.vacuum()
        for kind, r in reversed(created):
            j = self.b_index(r) if kind == "b" else self.d_index(r)
            v = self.creation(j) @ v
        return v

    def identity(self) -> sps.csr_matrix:
        return sps.identity(self.dim, dtype=complex, format="csr")


def mode_energies(basis: FockBasis, cfg: SimConfig) -> np.ndarray:
    """E_r for every mode on the chain, b modes then d modes"""
    E = cfg.energy(basis.r)
    return np.concatenate([E, E])


def build_H0(basis: FockBasis, cfg: SimConfig) -> sps.csr_matrix:
    """sum_r E_r (b_r^dagger b_r + d_r^dagger d_r), diagonal in the occupation basis"""
    E = mode_energies(basis, cfg)
    occupied = (basis.states[:, None] >> np.arange(basis.n_modes)) & 1
    return sps.diags(occupied @ E, format="csr").astype(complex)


def _bilinear(basis: FockBasis, block: str, r: int, s: int) -> sps.csr_matrix:
    """Operator part of one bilinear; blocks 'bb', 'bd', 'db', 'dd' as listed in the module docstring"""
    cache = basis.bilinears
    key = (block, r, s)
    if key not in cache:
        b_r, b_s = basis.b_index(r), basis.b_index(s)
        d_r, d_s = basis.d_index(r), basis.d_index(s)
        if block == "bb":
            op = basis.creation(b_r) @ basis.annihilation(b_s)
        elif block == "bd":
            op = basis.creation(b_r) @ basis.creation(d_s)
        elif block == "db":
            op = basis.annihilation(d_r) @ basis.annihilation(b_s)
        else:
            op = -(basis.creation(d_s) @ basis.annihilation(d_r))
            if r == s:
                op = op + basis.identity()
        cache[key] = op.tocsr()
    return cache[key]


# (row of psi^dagger spinor, row of psi spinor) for each block
_BLOCK_SIGNS = {"bb": (+1, +1), "bd": (+1, -1), "db": (-1, +1), "dd": (-1, -1)}


def _block_coefficients(z: float, basis: FockBasis, cfg: SimConfig, matrix: np.ndarray,
                        derivative: bool = False) -> dict:
    """q u_{lam,r}^dagger M u_{lam',s} exp(i(p_s - p_r)z), optionally differentiated in z"""
    U = spinor_table(cfg, basis.R_F)
    p = cfg.momentum(basis.r)
    dp = p[None, :] - p[:, None]
    phase = np.exp(1j * dp * z)
    if derivative:
        phase = 1j * dp * phase
    coeffs = {}
    for block, (lam, lam_p) in _BLOCK_SIGNS.items():
        overlap = U[SIGN_ROW[lam]].conj() @ matrix @ U[SIGN_ROW[lam_p]].T
        coeffs[block] = cfg.q * overlap * phase
    return coeffs


def _assemble(z: float, basis: FockBasis, cfg: SimConfig, matrix: np.ndarray, derivative: bool = False) -> sps.csr_matrix:
    coeffs = _block_coefficients(z, basis, cfg, matrix, derivative)
    op = sps.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for block, table in coeffs.items():
        for i, r in enumerate(basis.r):
            for k, s in enumerate(basis.r):
                if table[i, k] != 0:
                    op = op + table[i, k] * _bilinear(basis, block, int(r), int(s))
    return op.tocsr()


def build_rho(z: float, basis: FockBasis, cfg: SimConfig) -> sps.csr_matrix:
    """q psi^dagger(z) psi(z), not normal ordered"""
    return _assemble(z, basis, cfg, IDENTITY)


def build_J(z: float, basis: FockBasis, cfg: SimConfig) -> sps.csr_matrix:
    """q psi^dagger(z) sigma_x psi(z)"""
    return _assemble(z, basis, cfg, SIGMA_X)


def build_dJ(z: float, basis: FockBasis, cfg: SimConfig) -> sps.csr_matrix:
    """d/dz of build_J, differentiated term by term"""
    return _assemble(z, basis, cfg, SIGMA_X, derivative=True)


def total_charge(basis: FockBasis, cfg: SimConfig) -> sps.csr_matrix:
    """
    Integral of rho over the box. Phase differences reach 2 R_F harmonics, so the
    periodic rule on 2 R_F + 1 points is exact. Carries the vacuum offset q (2 R_F + 1).
    """
    n = 2 * basis.R_F + 1
    z = -0.5 * cfg.L + cfg.L * np.arange(n) / n
    op = sps.csr_matrix((basis.dim, basis.dim), dtype=complex)
    for zj in z:
        op = op + build_rho(float(zj), basis, cfg)
    return (op * (cfg.L / n)).tocsr()


def pair_amplitude(r: int, s: int, z: float, cfg: SimConfig) -> complex:
    """<b_r^dagger d_s^dagger 0| rho(z) |0> = q u_{+1,r}^dagger u_{-1,s} exp(i(p_s - p_r)z)"""
    R = max(abs(r), abs(s))
    U = spinor_table(cfg, R)
    overlap = np.vdot(U[SIGN_ROW[+1], r + R], U[SIGN_ROW[-1], s + R])
    return complex(cfg.q * overlap * np.exp(1j * float(cfg.momentum(s) - cfg.momentum(r)) * z))


# vacuum and spectrum

def energy_expectation(state: np.ndarray, h0: sps.spmatrix) -> float:
    """<state| H0 |state> for a normalized vector"""
    return float(np.real(np.vdot(state, h0 @ state)))


def random_state_energies(basis: FockBasis, cfg: SimConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    """<H0> over `count` random normalized vectors"""
    h0 = build_H0(basis, cfg)
    vecs = rng.normal(size=(count, basis.dim)) + 1j * rng.normal(size=(count, basis.dim))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return np.real(np.einsum("ki,ki->k", vecs.conj(), (h0 @ vecs.T).T))


def spectrum_check(basis: FockBasis, cfg: SimConfig) -> Tuple[float, float, int]:
    """(smallest eigenvalue, vacuum eigenvalue, multiplicity of the smallest eigenvalue)"""
    eigenvalues = build_H0(basis, cfg).diagonal().real
    lowest = float(eigenvalues.min())
    return lowest, float(eigenvalues[0]), int(np.count_nonzero(np.isclose(eigenvalues, lowest, atol=1e-14)))


# Schwinger term

def schwinger_sum(z: float, basis: FockBasis, cfg: SimConfig) -> float:
    """
    S = 2 sum_k eps_k |<k| rho(z) |0>|^2 over the pair states b_r^dagger d_s^dagger |0>,
    the coefficient of i in the vacuum expectation of d/dz' [J(z'), rho(z)] at z' = z.
    """
    rho_vac = build_rho(z, basis, cfg) @ basis.vacuum()
    E = cfg.energy(basis.r)
    total = 0.0
    for i, r in enumerate(basis.r):
        for k, s in enumerate(basis.r):
            pair = basis.index((1 << basis.b_index(int(r))) | (1 << basis.d_index(int(s))))
            # b_r^dagger d_s^dagger |0> carries Jordan-Wigner sign +1 since b modes sit below d modes
            total += (E[i] + E[k]) * abs(rho_vac[pair]) ** 2
    return 2.0 * total


def commutator_derivative_direct(z: float, z_prime: float, basis: FockBasis, cfg: SimConfig,
                                 h0: Optional[sps.spmatrix] = None) -> complex:
    """<0|rho(z') H0 rho(z)|0> + <0|rho(z) H0 rho(z')|0> by sparse products"""
    h0 = build_H0(basis, cfg) if h0 is None else h0
    vac = basis.vacuum()
    v = build_rho(z, basis, cfg) @ vac
    v_prime = build_rho(z_prime, basis, cfg) @ vac
    return complex(np.vdot(v_prime, h0 @ v) + np.vdot(v, h0 @ v_prime))


def commutator_derivative_from_current(z: float, basis: FockBasis, cfg: SimConfig) -> complex:
    """<0|[dJ/dz(z), rho(z)]|0> from the term-by-term derivative operator"""
    vac = basis.vacuum()
    dJ = build_dJ(z, basis, cfg)
    rho = build_rho(z, basis, cfg)
    return complex(np.vdot(vac, dJ @ (rho @ vac)) - np.vdot(vac, rho @ (dJ @ vac)))


def schwinger_rows(R_F_values: Sequence[int], P: Optional[int], z_points: Sequence[float],
                   cfg: SimConfig) -> List[SchwingerRow]:
    """S by both routes at each Fock cutoff; z_spread is the variation of S over z_points"""
    rows = []
    for R_F in R_F_values:
        basis = FockBasis(R_F, P)
        h0 = build_H0(basis, cfg)
        spectral = [schwinger_sum(z, basis, cfg) for z in z_points]
        direct = commutator_derivative_direct(z_points[0], z_points[0], basis, cfg, h0)
        row = SchwingerRow(
            R_F=R_F,
            S_spectral=spectral[0],
            S_direct=float(direct.real),
            dim=basis.dim,
            z_spread=float(max(spectral) - min(spectral)),
        )
        logger.info(f"R_F={R_F}: S={row.S_spectral:.15g}, direct {row.S_direct:.15g}, dim {row.dim}")
        rows.append(row)
    return rows


# operator identities

def anticommutator_deviation(basis: FockBasis) -> float:
    """Largest entry of {c_j, c_k^dagger} - delta_jk, {c_j, c_k} and {c_j^dagger, c_k^dagger} over all modes"""
    worst = 0.0
    eye = basis.identity()
    for j in range(basis.n_modes):
        for k in range(basis.n_modes):
            cj, cj_dag = basis.annihilation(j), basis.creation(j)
            ck, ck_dag = basis.annihilation(k), basis.creation(k)
            mixed = cj @ ck_dag + ck_dag @ cj
            if j == k:
                mixed = mixed - eye
            for op in (mixed, cj @ ck + ck @ cj, cj_dag @ ck_dag + ck_dag @ cj_dag):
                if op.nnz:
                    worst = max(worst, float(np.max(np.abs(op.data))))
    return worst


def _max_abs(op: sps.spmatrix) -> float:
    op = sps.csr_matrix(op)
    return float(np.max(np.abs(op.data))) if op.nnz else 0.0


def h0_rho_residual(z: float, basis: FockBasis, cfg: SimConfig) -> float:
    """Largest entry of i[H0, rho(z)] + dJ/dz(z)"""
    h0 = build_H0(basis, cfg)
    rho = build_rho(z, basis, cfg)
    return _max_abs(1j * (h0 @ rho - rho @ h0) + build_dJ(z, basis, cfg))


def continuity_violation_report(basis: FockBasis, cfg: SimConfig, z: float = 0.0, z_prime: float = 0.7,
                                tol: float = 1e-12) -> ContinuityViolationReport:
    """
    Which relations behind an operator continuity equation survive on the truncated space:
    i[H0, rho] = -dJ/dz (reported as a residual), [J(z'), rho(z)] = 0 (fails by S) and
    <0|[rho(z'), rho(z)]|0> = 0. rho is not normal ordered; its vacuum value
    q (2 R_F + 1) / L is reported, not subtracted.
    """
    vac = basis.vacuum()
    rho, rho_prime = build_rho(z, basis, cfg), build_rho(z_prime, basis, cfg)
    rho_rho = complex(np.vdot(vac, rho_prime @ (rho @ vac)) - np.vdot(vac, rho @ (rho_prime @ vac)))
    rho_vacuum = complex(np.vdot(vac, rho @ vac))
    schwinger = schwinger_sum(z, basis, cfg)
    derivative_route = commutator_derivative_from_current(z, basis, cfg)
    return ContinuityViolationReport(
        R_F=basis.R_F,
        dim=basis.dim,
        schwinger=schwinger,
        derivative_route=float(derivative_route.imag),
        rho_vacuum=float(rho_vacuum.real),
        rho_rho_vacuum=abs(rho_rho),
        h0_rho_residual=h0_rho_residual(z, basis, cfg),
        current_rho_holds=schwinger <= tol,
        rho_rho_holds=abs(rho_rho) <= tol,
    )
