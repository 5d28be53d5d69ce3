"""Dense exact diagonalization of small spin-1/2 chains.

Builds Hamiltonians from weighted Pauli strings, diagonalizes them fully
(the spectral form of the time average needs every eigenpair), and
implements the finite-size protocols: the time-averaged state

    rho_bar(t0, t)_{mn} = c_m conj(c_n) e^{-i(E_m - E_n) t0} K(E_m - E_n),
    K(D) = int_0^t w(s) e^{-i D s} ds   (uniform: (e^{-iDt} - 1)/(-iDt)),

its eigenvalue spectrum with low-probability truncation, the error made by
projecting the evolving state onto the retained subspace, and the energy
cumulants per site together with their spatial densities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .asymptotics import WeightFunction
from .errors import ConfigError, DomainError, SizeError
from .special import erf_inv

__all__ = [
    "PauliHamiltonian",
    "SpectralDecomposition",
    "AveragedStateSpectrum",
    "EffectiveRank",
    "ProjectionErrorResult",
    "RankCurve",
    "DegenerateGroundStateWarning",
    "build_hamiltonian",
    "ground_state",
    "spectral_decomposition",
    "return_amplitude",
    "first_overlap_crossing",
    "averaged_state",
    "effective_rank",
    "rank_curve",
    "projection_error",
    "energy_cumulants",
    "cumulant_operator",
    "energy_cumulants_operator_route",
    "cumulant_density",
    "chaotic_chain",
    "chaotic_initial_chain",
    "integrable_chain",
    "polarized_state",
    "read_hamiltonian_file",
    "write_hamiltonian_file",
]

MAX_SITES = 14

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DegenerateGroundStateWarning(UserWarning):
    """Ground state nearly degenerate; the gauge-fixed lowest vector is used."""


# ---------------------------------------------------------------------------
# Hamiltonian description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PauliHamiltonian:
    """Spin chain as a list of weighted Pauli strings.

    Each term is (coefficient, ((site, op), ...)) with real coefficients
    (Hermiticity) and ops in {X, Y, Z}. `boundary` records how the chain
    was generated; the terms themselves are always explicit.
    """

    L: int
    terms: tuple[tuple[float, tuple[tuple[int, str], ...]], ...]
    boundary: str = "periodic"

    def __post_init__(self):
        if self.L < 1:
            raise DomainError("L must be at least 1")
        if self.L > MAX_SITES:
            raise SizeError(f"L = {self.L} exceeds the dense-ED limit "
                            f"{MAX_SITES}")
        if self.boundary not in ("periodic", "open"):
            raise DomainError(f"unknown boundary {self.boundary!r}")
        canon = []
        for coeff, ops in self.terms:
            coeff = float(coeff)
            ops = tuple(sorted((int(s), str(o).upper()) for s, o in ops))
            if not ops:
                raise DomainError("each term needs at least one operator")
            sites = [s for s, _ in ops]
            if len(set(sites)) != len(sites):
                raise DomainError(f"repeated site in term {ops}")
            for s, o in ops:
                if not 0 <= s < self.L:
                    raise DomainError(f"site {s} outside chain of length "
                                      f"{self.L}")
                if o not in _PAULI:
                    raise DomainError(f"unknown Pauli label {o!r}")
            canon.append((coeff, ops))
        object.__setattr__(self, "terms", tuple(canon))

    @property
    def dim(self) -> int:
        return 2 ** self.L


def build_hamiltonian(spec: PauliHamiltonian) -> np.ndarray:
    """Dense Hermitian matrix of the Pauli-string sum (2^L x 2^L)."""
    acc = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    for coeff, ops in spec.terms:
        acc = acc + coeff * _string_matrix(spec.L, ops)
    h = acc.toarray()
    scale = max(np.abs(h).max(), 1.0)
    if np.abs(h - h.conj().T).max() > 1e-14 * scale:
        raise DomainError("constructed matrix is not Hermitian")
    return h


def _string_matrix(L: int, ops) -> sp.csr_matrix:
    lookup = dict(ops)
    out = sp.identity(1, dtype=complex, format="csr")
    for site in range(L):
        block = _PAULI[lookup[site]] if site in lookup else np.eye(2)
        out = sp.kron(out, sp.csr_matrix(block), format="csr")
    return out


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, PauliHamiltonian):
        return build_hamiltonian(h)
    return np.asarray(h, dtype=complex)


# ---------------------------------------------------------------------------
# Eigenproblems
# ---------------------------------------------------------------------------

def ground_state(spec, gap_tol: float = 1e-10) -> np.ndarray:
    """Normalized lowest eigenvector with a deterministic gauge.

    The first amplitude above numerical noise is rotated to the positive
    real axis. A gap below `gap_tol` triggers a degeneracy warning; the
    gauge-fixed vector of the lowest level is still returned.
    """
    h = _as_matrix(spec)
    if h.shape[0] == 1:
        return np.ones(1, dtype=complex)
    vals, vecs = scipy.linalg.eigh(h, subset_by_index=[0, 1])
    if vals[1] - vals[0] < gap_tol:
        warnings.warn(f"ground state nearly degenerate (gap = "
                      f"{vals[1] - vals[0]:.3e})",
                      DegenerateGroundStateWarning, stacklevel=2)
    return _fix_gauge(vecs[:, 0])


def _fix_gauge(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    idx = np.argmax(np.abs(v) > 1e-12 * np.abs(v).max())
    phase = v[idx] / abs(v[idx])
    return v * phase.conjugate()


@dataclass(frozen=True)
class SpectralDecomposition:
    """Full eigensystem plus initial-state overlaps c_n = <E_n|Psi_0>."""

    energies: np.ndarray          # ascending, real
    overlaps: np.ndarray          # complex, sum |c_n|^2 = 1
    basis: np.ndarray             # columns are |E_n> in the site basis
    L: int

    @property
    def dim(self) -> int:
        return self.energies.size


def spectral_decomposition(spec, psi0: np.ndarray,
                           check: bool = True) -> SpectralDecomposition:
    """Diagonalize and project the initial state onto the eigenbasis."""
    h = _as_matrix(spec)
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-8:
        raise DomainError(f"initial state norm {norm} is not 1")
    psi0 = psi0 / norm
    energies, basis = np.linalg.eigh(h)
    overlaps = basis.conj().T @ psi0
    L = int(round(math.log2(h.shape[0])))
    sd = SpectralDecomposition(energies=energies, overlaps=overlaps,
                               basis=basis, L=L)
    if check:
        total = float(np.sum(np.abs(overlaps) ** 2))
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"overlap normalization off: {total}")
        scale = max(np.abs(energies).max(), 1.0)
        rng = np.random.default_rng(0)
        for n in rng.integers(0, sd.dim, size=min(5, sd.dim)):
            res = np.linalg.norm(h @ basis[:, n] - energies[n] * basis[:, n])
            if res > 1e-8 * scale:
                raise DomainError(f"eigenpair residual {res:.2e} too large")
    return sd


def return_amplitude(sd: SpectralDecomposition, t) -> np.ndarray | float:
    """|<Psi_t|Psi_0>| = |sum_n |c_n|^2 e^{-i E_n t}| at scalar or array t."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    weights = np.abs(sd.overlaps) ** 2
    amp = np.abs(np.exp(-1j * np.outer(ts, sd.energies)) @ weights)
    return float(amp[0]) if np.isscalar(t) or np.ndim(t) == 0 else amp


def first_overlap_crossing(sd: SpectralDecomposition, threshold: float = 0.5,
                           t_max: float = 10.0, n_grid: int = 4000) -> float:
    """First time the return amplitude drops below `threshold`."""
    ts = np.linspace(0.0, t_max, n_grid + 1)
    amp = return_amplitude(sd, ts)
    below = np.nonzero(amp < threshold)[0]
    if below.size == 0:
        raise DomainError(f"amplitude never drops below {threshold} "
                          f"within t_max = {t_max}")
    hi = ts[below[0]]
    lo = ts[below[0] - 1]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if return_amplitude(sd, mid) < threshold:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Time-averaged state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AveragedStateSpectrum:
    """Eigenvalues of the averaged state, descending, with prefix sums."""

    eigenvalues: np.ndarray
    t0: float
    t: float
    cumulative: np.ndarray = field(repr=False)
    vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def purity(self) -> float:
        return float(np.sum(self.eigenvalues ** 2))


def _uniform_kernel(delta: np.ndarray, t: float) -> np.ndarray:
    """K(D) = (e^{-iDt} - 1)/(-iDt), Taylor-expanded near the diagonal."""
    x = delta * t
    small = np.abs(x) < 1e-6
    x_safe = np.where(small, 1.0, x)
    out = (np.exp(-1j * x_safe) - 1.0) / (-1j * x_safe)
    taylor = 1.0 - 1j * x / 2.0 - x ** 2 / 6.0 + 1j * x ** 3 / 24.0
    return np.where(small, taylor, out)


def _weighted_kernel(delta: np.ndarray, t: float,
                     w: WeightFunction) -> np.ndarray:
    """K(D) = int_0^t w(s) e^{-iDs} ds by composite Gauss-Legendre."""
    d_max = float(np.abs(delta).max())
    panels = max(16, int(math.ceil(d_max * t / 3.0)))
    edges = np.linspace(0.0, t, panels + 1)
    x, wq = np.polynomial.legendre.leggauss(8)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wq[None, :]).ravel()
    dens = np.array([w.density(float(s)) for s in nodes])
    flat = delta.ravel()
    out = np.exp(-1j * np.outer(flat, nodes)) @ (weights * dens)
    return out.reshape(delta.shape)


def averaged_state(sd: SpectralDecomposition, t0: float, t: float,
                   w: WeightFunction | None = None,
                   want_vectors: bool = False) -> AveragedStateSpectrum:
    """Spectrum of the state averaged over [t0, t0 + t].

    The matrix is assembled in the energy basis from the overlap dyad and
    the window kernel K; `w = None` means the uniform window with its
    closed-form kernel. Eigenvalues are returned descending, with values
    in [-1e-12, 0) clamped to zero, and eigenvectors (energy-basis
    columns, same order) attached on request.
    """
    if t <= 0:
        raise DomainError("window width t must be positive")
    delta = sd.energies[:, None] - sd.energies[None, :]
    if w is None:
        kernel = _uniform_kernel(delta, t)
    else:
        if abs(w.t - t) > 1e-12 * max(t, 1.0):
            raise DomainError("weight window differs from requested t")
        kernel = _weighted_kernel(delta, t, w)
    if t0 != 0.0:
        kernel = kernel * np.exp(-1j * delta * t0)
    mat = (sd.overlaps[:, None] * sd.overlaps[None, :].conj()) * kernel
    del delta, kernel
    if want_vectors:
        vals, vecs = np.linalg.eigh(mat)
        order = np.argsort(vals)[::-1]
        vals = vals[order]
        vecs = vecs[:, order]
    else:
        vals = np.linalg.eigvalsh(mat)[::-1]
        vecs = None
    vals = np.where((vals < 0) & (vals > -1e-12), 0.0, vals)
    total = float(vals.sum())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"averaged-state trace {total} deviates from 1")
    return AveragedStateSpectrum(eigenvalues=vals, t0=float(t0), t=float(t),
                                 cumulative=np.cumsum(vals), vectors=vecs)


class EffectiveRank(NamedTuple):
    D: int
    discarded: float
    lambda_cut: float


def effective_rank(spec: AveragedStateSpectrum, eps: float) -> EffectiveRank:
    """Minimal number of top eigenvalues with tail mass at most eps.

    Returns the count, the actual (quantized) discarded mass, and the
    smallest retained eigenvalue. Comparisons carry an ulp-level slack so
    exactly representable boundaries behave as written.
    """
    if not 0.0 <= eps < 1.0:
        raise DomainError("eps must lie in [0, 1)")
    lam = spec.eigenvalues
    tail = np.concatenate([[lam.sum()], lam.sum() - spec.cumulative])
    ok = tail <= eps * (1.0 + 1e-12) + 1e-15
    ok[0] = False  # at least one eigenvector is always retained
    d = int(np.argmax(ok))
    return EffectiveRank(D=d, discarded=float(max(tail[d], 0.0)),
                         lambda_cut=float(lam[d - 1]))


@dataclass(frozen=True)
class RankCurve:
    """Effective rank against window width, with the closed-form line."""

    times: np.ndarray
    epsilons: np.ndarray
    dims: np.ndarray
    dims_per_sqrt_l: np.ndarray
    prediction_per_sqrt_l: np.ndarray
    e2: float
    L: int


def rank_curve(spec, psi0: np.ndarray,
               eps_schedule: Callable[[float], float],
               times: Sequence[float],
               sd: SpectralDecomposition | None = None) -> RankCurve:
    """Effective rank per unit sqrt(L) over a time grid.

    For each window width the averaged state is diagonalized and truncated
    at eps_schedule(t); the companion prediction line is
    sqrt(2 e2)/pi * erfinv(1 - eps_t) * sqrt(L) * t with e2 taken from the
    measured energy cumulants of the same system.
    """
    if sd is None:
        sd = spectral_decomposition(spec, psi0)
    e2 = float(energy_cumulants(sd, 2)[1])
    sqrt_l = math.sqrt(sd.L)
    times = np.asarray(list(times), dtype=float)
    eps = np.array([eps_schedule(float(t)) for t in times])
    dims = np.empty(times.size, dtype=int)
    pred = np.empty(times.size)
    for i, (t, e) in enumerate(zip(times, eps)):
        spec_t = averaged_state(sd, 0.0, float(t))
        dims[i] = effective_rank(spec_t, float(e)).D
        pred[i] = math.sqrt(2.0 * e2) / math.pi * erf_inv(1.0 - float(e)) \
            * sqrt_l * float(t)
    return RankCurve(times=times, epsilons=eps, dims=dims,
                     dims_per_sqrt_l=dims / sqrt_l,
                     prediction_per_sqrt_l=pred / sqrt_l,
                     e2=e2, L=sd.L)


@dataclass(frozen=True)
class ProjectionErrorResult:
    """Projection error over a time grid plus its quantization band.

    `error` uses the D eigenvectors retained at tail mass eps; `band_low`
    and `band_high` retain one more / one fewer vector, bracketing the
    indeterminacy caused by the quantized spectrum.
    """

    times: np.ndarray
    error: np.ndarray
    band_low: np.ndarray
    band_high: np.ndarray
    D: int
    discarded: float


def projection_error(sd: SpectralDecomposition, T: float, eps_T: float,
                     t, spec: AveragedStateSpectrum | None = None
                     ) -> ProjectionErrorResult:
    """Error of projecting |Psi_t> onto the retained subspace of the
    [0, T] average: 1 - <Psi_t| P |Psi_t>.

    `spec` may carry a precomputed eigendecomposition (with vectors) of the
    averaged state to avoid repeating the dense solve.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < -1e-12) or np.any(ts > T * (1 + 1e-12)):
        raise DomainError("projection times must lie in [0, T]")
    if spec is None or spec.vectors is None:
        spec = averaged_state(sd, 0.0, T, want_vectors=True)
    rank = effective_rank(spec, eps_T)
    d = rank.D
    k = min(d + 1, spec.eigenvalues.size)
    psi_t = sd.overlaps[:, None] * np.exp(
        -1j * np.outer(sd.energies, ts))
    amps = spec.vectors[:, :k].conj().T @ psi_t      # (k, nt)
    captured = np.cumsum(np.abs(amps) ** 2, axis=0)

    def err_at(nkeep: int) -> np.ndarray:
        if nkeep <= 0:
            return np.ones_like(ts)
        row = min(nkeep, k) - 1
        return np.clip(1.0 - captured[row], 0.0, 1.0)

    return ProjectionErrorResult(times=ts, error=err_at(d),
                                 band_low=err_at(d + 1),
                                 band_high=err_at(d - 1),
                                 D=d, discarded=rank.discarded)


# ---------------------------------------------------------------------------
# Energy cumulants
# ---------------------------------------------------------------------------

def _energy_moments(sd_or_pair, n_max: int) -> tuple[np.ndarray, int]:
    """Raw moments <H^k>, k = 0..n_max, and the chain length."""
    if isinstance(sd_or_pair, SpectralDecomposition):
        sd = sd_or_pair
        weights = np.abs(sd.overlaps) ** 2
        scale = float(np.abs(sd.energies).max()) if sd.dim > 1 else 1.0
        if scale ** n_max > 1e280:
            raise DomainError("moment overflow: n_max too large for this "
                              "spectral radius")
        moments = np.array([float(weights @ sd.energies ** k)
                            for k in range(n_max + 1)])
        return moments, sd.L
    spec, psi0 = sd_or_pair
    h = _as_matrix(spec)
    l_sites = int(round(math.log2(h.shape[0])))
    psi = np.asarray(psi0, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    moments = np.empty(n_max + 1)
    vec = psi.copy()
    moments[0] = 1.0
    for k in range(1, n_max + 1):
        vec = h @ vec
        moments[k] = float(np.real(np.vdot(psi, vec)))
        if abs(moments[k]) > 1e280:
            raise DomainError("moment overflow: n_max too large")
    return moments, l_sites


def _cumulants_from_moments(moments: np.ndarray) -> np.ndarray:
    """kappa_n = m_n - sum_j C(n-1, j-1) kappa_j m_{n-j} (kappa_0 unused)."""
    n_max = moments.size - 1
    kappa = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        acc = moments[n]
        for j in range(1, n):
            acc -= math.comb(n - 1, j - 1) * kappa[j] * moments[n - j]
        kappa[n] = acc
    return kappa


def energy_cumulants(sd_or_pair, n_max: int) -> np.ndarray:
    """Per-site energy cumulants e_1..e_{n_max} of the initial state.

    Accepts a SpectralDecomposition or an (H, psi0) pair; the latter uses
    iterated matrix-vector products and never diagonalizes.
    """
    if not 1 <= n_max <= 8:
        raise DomainError("n_max must lie in [1, 8]")
    moments, l_sites = _energy_moments(sd_or_pair, n_max)
    kappa = _cumulants_from_moments(moments)
    return kappa[1:] / l_sites


def cumulant_operator(spec, psi0: np.ndarray, n: int) -> np.ndarray:
    """n-th operator of the recursion H^(n) = H^n - sum_j C(n,j) <H^{n-j}>
    H^(j), whose expectations resum to the cumulant generating function."""
    if n < 1:
        raise DomainError("n must be at least 1")
    h = _as_matrix(spec)
    psi = np.asarray(psi0, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    powers = [np.eye(h.shape[0], dtype=complex)]
    for _ in range(n):
        powers.append(h @ powers[-1])
    moments = [float(np.real(np.vdot(psi, p @ psi))) for p in powers]
    ops = {1: powers[1]}
    for m in range(2, n + 1):
        acc = powers[m].copy()
        for j in range(1, m):
            acc -= math.comb(m, j) * moments[m - j] * ops[j]
        ops[m] = acc
    return ops[n]


def energy_cumulants_operator_route(spec, psi0: np.ndarray,
                                    n_max: int) -> np.ndarray:
    """Per-site cumulants recovered from <H^(n)> expectations.

    The expectations generate G(b) = 1 - exp(-K(b)) with K the cumulant
    generating function, so the cumulants follow from the series of
    -log(1 - G). Independent cross-check of `energy_cumulants`.
    """
    if not 1 <= n_max <= 8:
        raise DomainError("n_max must lie in [1, 8]")
    h = _as_matrix(spec)
    l_sites = int(round(math.log2(h.shape[0])))
    psi = np.asarray(psi0, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    g_coeff = np.zeros(n_max + 1)  # G(b) = sum g_n b^n / n!
    for n in range(1, n_max + 1):
        op = cumulant_operator(h, psi, n)
        g_coeff[n] = float(np.real(np.vdot(psi, op @ psi)))
    a = np.array([g_coeff[n] / math.factorial(n)
                  for n in range(n_max + 1)])  # series coefficients of G
    k = np.zeros(n_max + 1)  # series coefficients of K = -log(1 - G)
    for m in range(0, n_max):
        acc = (m + 1) * a[m + 1]
        for j in range(1, m + 1):
            acc += (m - j + 1) * k[m - j + 1] * a[j]
        k[m + 1] = acc / (m + 1)
    kappa = np.array([k[n] * math.factorial(n) for n in range(n_max + 1)])
    return kappa[1:] / l_sites


def _density_terms(spec: PauliHamiltonian) -> dict[int, list]:
    """Group terms into site densities: two-site bonds go to their left
    site (the wrap bond to L-1), single-site terms to their own site."""
    groups: dict[int, list] = {ell: [] for ell in range(spec.L)}
    for coeff, ops in spec.terms:
        sites = sorted(s for s, _ in ops)
        if len(sites) == 1:
            ell = sites[0]
        elif len(sites) == 2:
            a, b = sites
            if b - a == 1:
                ell = a
            elif a == 0 and b == spec.L - 1:
                ell = b  # periodic wrap bond
            else:
                ell = a
        else:
            raise DomainError("terms spanning more than two sites cannot "
                              "be grouped into site densities")
        groups[ell].append((coeff, ops))
    return groups


def cumulant_density(spec: PauliHamiltonian, psi0: np.ndarray, site: int,
                     n: int, sd: SpectralDecomposition | None = None) -> float:
    """Spatial density of the n-th energy cumulant about one site.

    Computed exactly as the (n-1)-th derivative at b = 0 of the energy
    density expectation in the imaginary-time-evolved state
    e^{b H/2}|Psi_0>/norm, carried out in the energy eigenbasis; the
    densities sum to L e_n.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if n > 6:
        raise DomainError("densities implemented for n <= 6")
    if not 0 <= site < spec.L:
        raise DomainError(f"site {site} outside chain")
    groups = _density_terms(spec)
    h_ell = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    for coeff, ops in groups[site]:
        h_ell = h_ell + coeff * _string_matrix(spec.L, ops)
    if sd is None:
        sd = spectral_decomposition(spec, psi0)
    h_rot = sd.basis.conj().T @ h_ell.toarray() @ sd.basis
    weight = np.outer(sd.overlaps.conj(), sd.overlaps) * h_rot
    if n == 1:
        return float(np.real(weight.sum()))
    s_grid = 0.5 * (sd.energies[:, None] + sd.energies[None, :])
    numer = np.empty(n)          # derivatives of <e^{bH/2} h e^{bH/2}>
    for k in range(n):
        numer[k] = float(np.real(np.sum(weight * s_grid ** k)))
    denom = np.array([float((np.abs(sd.overlaps) ** 2) @ sd.energies ** k)
                      for k in range(n)])
    ratio = np.empty(n)          # derivatives of numer/denom at 0
    for k in range(n):
        acc = numer[k]
        for j in range(k):
            acc -= math.comb(k, j) * ratio[j] * denom[k - j]
        ratio[k] = acc
    return float(ratio[n - 1])


# ---------------------------------------------------------------------------
# Bundled chains and states
# ---------------------------------------------------------------------------

def _bonds(L: int, boundary: str):
    out = [(ell, ell + 1) for ell in range(L - 1)]
    if boundary == "periodic" and L > 1:
        out.append((L - 1, 0))
    return out


def chaotic_chain(L: int, J: float = 1.0,
                  boundary: str = "periodic") -> PauliHamiltonian:
    """Nonintegrable chain: J sum [yy + 0.5 xx + 1.5 zz] couplings plus a
    uniform x field 0.25 J and a staggered z field 0.3 J (-1)^site."""
    terms = []
    for a, b in _bonds(L, boundary):
        terms.append((J, ((a, "Y"), (b, "Y"))))
        terms.append((0.5 * J, ((a, "X"), (b, "X"))))
        terms.append((1.5 * J, ((a, "Z"), (b, "Z"))))
    for ell in range(L):
        terms.append((0.25 * J, ((ell, "X"),)))
        terms.append((0.3 * J * (-1) ** ell, ((ell, "Z"),)))
    return PauliHamiltonian(L=L, terms=tuple(terms), boundary=boundary)


def chaotic_initial_chain(L: int, J: float = 1.0,
                          boundary: str = "periodic") -> PauliHamiltonian:
    """Ferromagnetic xx chain with a transverse y field: -J sum (xx + 2 y);
    its ground state is the companion initial state of `chaotic_chain`."""
    terms = []
    for a, b in _bonds(L, boundary):
        terms.append((-J, ((a, "X"), (b, "X"))))
    for ell in range(L):
        terms.append((-2.0 * J, ((ell, "Y"),)))
    return PauliHamiltonian(L=L, terms=tuple(terms), boundary=boundary)


def integrable_chain(L: int, J: float = 1.0,
                     boundary: str = "periodic") -> PauliHamiltonian:
    """Integrable anisotropic chain J sum (xx + 2 yy + zz)."""
    terms = []
    for a, b in _bonds(L, boundary):
        terms.append((J, ((a, "X"), (b, "X"))))
        terms.append((2.0 * J, ((a, "Y"), (b, "Y"))))
        terms.append((J, ((a, "Z"), (b, "Z"))))
    return PauliHamiltonian(L=L, terms=tuple(terms), boundary=boundary)


def polarized_state(L: int, axis: str = "z") -> np.ndarray:
    """Product state fully polarized along +axis."""
    single = {
        "z": np.array([1.0, 0.0], dtype=complex),
        "x": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
        "y": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0),
    }
    if axis not in single:
        raise DomainError(f"unknown axis {axis!r}")
    out = np.ones(1, dtype=complex)
    for _ in range(L):
        out = np.kron(out, single[axis])
    return out


# ---------------------------------------------------------------------------
# Plain-text Hamiltonian files
# ---------------------------------------------------------------------------

def read_hamiltonian_file(path) -> PauliHamiltonian:
    """Parse the chain format: header lines `L=`, `boundary=`, then one
    term per line as `coeff op@site [op@site]`; `#` starts a comment."""
    L = None
    boundary = "periodic"
    terms = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line and "@" not in line:
                key, _, val = line.partition("=")
                key = key.strip().lower()
                val = val.strip()
                if key == "l":
                    try:
                        L = int(val)
                    except ValueError:
                        raise ConfigError(
                            f"{path}:{lineno}: bad L value {val!r}") from None
                elif key == "boundary":
                    boundary = val
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown header "
                                      f"{key!r}")
                continue
            parts = line.split()
            try:
                coeff = float(parts[0])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad coefficient "
                                  f"{parts[0]!r}") from None
            ops = []
            for token in parts[1:]:
                if "@" not in token:
                    raise ConfigError(f"{path}:{lineno}: expected op@site, "
                                      f"got {token!r}")
                op, _, site = token.partition("@")
                try:
                    ops.append((int(site), op))
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: bad site "
                                      f"{site!r}") from None
            if not 1 <= len(ops) <= 2:
                raise ConfigError(f"{path}:{lineno}: terms must carry one "
                                  f"or two operators")
            terms.append((coeff, tuple(ops)))
    if L is None:
        raise ConfigError(f"{path}: missing L= header")
    try:
        return PauliHamiltonian(L=L, terms=tuple(terms), boundary=boundary)
    except (DomainError, SizeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_hamiltonian_file(spec: PauliHamiltonian, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"L={spec.L}\n")
        fh.write(f"boundary={spec.boundary}\n")
        for coeff, ops in spec.terms:
            tokens = " ".join(f"{op}@{site}" for site, op in ops)
            fh.write(f"{coeff!r} {tokens}\n")
