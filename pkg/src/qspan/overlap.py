"""Exact finite-volume moments of the time-averaged state.

The overlap of the state with itself at two times is controlled by the
dynamical free energy f, defined through

    <Psi_t | Psi_0> = exp(-L^d f(t)),         f(0) = 0,  Re f >= 0,
    f(-t) = conj(f(t)),

so the moments become low-dimensional integrals over the window,

    tr[rho_bar^alpha] = Re int_{[0,t]^alpha} d^alpha tau / t^alpha
                        exp(-L^d sum_cyclic f(tau_j - tau_{j+1})).

Translation invariance removes one integration variable exactly: with
u_j = tau_j - tau_{j+1} the free variable contributes the chord length
V(u) = t - (max(P,0) - min(P,0)), P_j = sum_{n>=j} u_n, leaving an
(alpha-1)-dimensional integral evaluated either on a tensor Gauss-Legendre
grid whose panel width tracks the Gaussian scale 1/sqrt(L^d e2), or by
stratified antithetic Monte Carlo with a Gaussian importance proposal.

For the transverse-field Ising chain after a field quench h_i -> h_f the
free energy is available in closed form as a single mode integral, which is
what `IsingQuench` evaluates (sums over discrete momenta are replaced by
the integral, dropping exponentially small finite-size effects).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ndtri

from .errors import AccuracyError, DomainError

__all__ = [
    "IsingQuench",
    "DynamicalFreeEnergy",
    "MomentEstimate",
    "RenyiEstimate",
    "BranchCrossingWarning",
    "GapClosingWarning",
    "ising_dispersion",
    "ising_f",
    "second_cumulant_from_f",
    "moments_quadrature",
    "renyi_quadrature",
]


class BranchCrossingWarning(UserWarning):
    """The mode-integral integrand crossed the negative real axis.

    Signals a potential dynamical phase transition; Re f stays reliable,
    Im f may jump by 2 pi between momenta.
    """


class GapClosingWarning(UserWarning):
    """The post-quench dispersion vanishes at some momentum (h_f = +-1)."""


class MomentEstimate(NamedTuple):
    value: float
    error: float


class RenyiEstimate(NamedTuple):
    value: float
    error: float


# ---------------------------------------------------------------------------
# Transverse-field Ising quench
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsingQuench:
    """Global field quench h_i -> h_f of the transverse-field Ising chain.

    `h_i = math.inf` is first class and uses the analytic limit of the
    Bogoliubov angle. `k_grid` sets the composite-Simpson resolution on
    [0, pi] (rounded up to an even interval count).
    """

    h_i: float
    h_f: float
    J: float = 1.0
    k_grid: int = 4096

    def __post_init__(self):
        if self.J <= 0:
            raise DomainError("coupling J must be positive")
        if self.k_grid < 64:
            raise DomainError("k_grid must be at least 64")


def ising_dispersion(q: IsingQuench, k):
    """Post-quench mode energy and Bogoliubov-angle cosine at momentum k.

    eps_k = 2J sqrt(1 + h_f^2 - 2 h_f cos k);
    cos Delta_k = [(h_f - cos k)(h_i - cos k) + sin^2 k] /
                  (sqrt(1 + h_f^2 - 2 h_f cos k) sqrt(1 + h_i^2 - 2 h_i cos k)),
    with the h_i -> inf limit (h_f - cos k)/sqrt(1 + h_f^2 - 2 h_f cos k).
    Accepts scalar or array k in [0, pi].
    """
    k_arr = np.asarray(k, dtype=float)
    cos_k = np.cos(k_arr)
    sin_k = np.sin(k_arr)
    disc_f = 1.0 + q.h_f ** 2 - 2.0 * q.h_f * cos_k
    eps = 2.0 * q.J * np.sqrt(np.maximum(disc_f, 0.0))
    if np.any(eps < 1e-12 * q.J):
        warnings.warn("dispersion vanishes at a gap-closing momentum",
                      GapClosingWarning, stacklevel=2)
    root_f = np.sqrt(np.maximum(disc_f, 1e-300))
    if math.isinf(q.h_i):
        cos_delta = (q.h_f - cos_k) / root_f
    else:
        disc_i = 1.0 + q.h_i ** 2 - 2.0 * q.h_i * cos_k
        num = (q.h_f - cos_k) * (q.h_i - cos_k) + sin_k ** 2
        cos_delta = num / (root_f * np.sqrt(np.maximum(disc_i, 1e-300)))
    if np.isscalar(k) or k_arr.ndim == 0:
        return float(eps), float(cos_delta)
    return eps, cos_delta


def _simpson_nodes(q: IsingQuench):
    n = q.k_grid + (q.k_grid % 2)
    k = np.linspace(0.0, math.pi, n + 1)
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= math.pi / n / 3.0
    return k, w


def _log_arguments(q: IsingQuench, t, eps, cos_delta):
    """Per-mode log argument (1+cos)/2 + (1-cos)/2 e^{2 i eps t}."""
    c = 0.5 * (1.0 + cos_delta)
    return c + (1.0 - c) * np.exp(2j * np.outer(np.atleast_1d(t), eps))


def ising_f(q: IsingQuench, t: float) -> complex:
    """Dynamical free energy of the quench at time t.

    f(t) = -int_0^pi dk/2pi log[(1+cos Delta_k)/2 + (1-cos Delta_k)/2
    e^{2 i eps_k t}] with the principal log per momentum; the overall minus
    makes Re f >= 0 under the overlap convention exp(-L^d f). Warns when
    the integrand crosses the negative real axis between grid momenta.
    """
    k, w = _simpson_nodes(q)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GapClosingWarning)
        eps, cos_delta = ising_dispersion(q, k)
    z = _log_arguments(q, float(t), eps, cos_delta)[0]
    _warn_on_branch_crossing(z)
    return complex(-np.sum(w * np.log(z)) / (2.0 * math.pi))


def _warn_on_branch_crossing(z: np.ndarray) -> None:
    im = z.imag
    re = z.real
    sign_change = im[:-1] * im[1:] < 0.0
    if not np.any(sign_change):
        return
    idx = np.nonzero(sign_change)[0]
    frac = im[idx] / (im[idx] - im[idx + 1])
    re_cross = re[idx] + frac * (re[idx + 1] - re[idx])
    if np.any(re_cross < 0.0):
        warnings.warn("log argument crosses the negative real axis "
                      "(possible dynamical phase transition)",
                      BranchCrossingWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# Dynamical free energy evaluators
# ---------------------------------------------------------------------------

class DynamicalFreeEnergy:
    """Evaluator for f(t) = -L^{-d} log <Psi_t|Psi_0>.

    Three kinds: `ising_quench` (closed-form mode integral),
    `cumulant_truncation` (finite cumulant polynomial) and `tabulated`
    (cubic-spline data). All satisfy f(0) = 0 and f(-t) = conj f(t); the
    negative-time values are always produced by conjugation.
    """

    def __init__(self, kind: str, eval_many, metadata: dict):
        self.kind = kind
        self._eval_many = eval_many
        self.metadata = dict(metadata)
        self._tables: dict = {}

    @classmethod
    def from_cumulants(cls, e) -> "DynamicalFreeEnergy":
        """Truncated series f(t) = -sum_n i^n e_n t^n / n! from e_1..e_n."""
        e = tuple(float(v) for v in e)
        coeffs = np.zeros(len(e) + 1, dtype=complex)
        fact = 1.0
        for n, en in enumerate(e, start=1):
            fact *= n
            coeffs[n] = -(1j ** n) * en / fact

        def eval_many(ts, _c=coeffs):
            ts = np.asarray(ts, dtype=float)
            return np.polynomial.polynomial.polyval(ts, _c)

        return cls("cumulant_truncation", eval_many, {"cumulants": e})

    @classmethod
    def from_ising(cls, q: IsingQuench) -> "DynamicalFreeEnergy":
        k, w = _simpson_nodes(q)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GapClosingWarning)
            eps, cos_delta = ising_dispersion(q, k)

        def eval_many(ts, _q=q, _w=w, _eps=eps, _cd=cos_delta):
            ts = np.asarray(ts, dtype=float)
            flat = ts.ravel()
            out = np.empty(flat.shape, dtype=complex)
            chunk = max(1, 2_000_000 // (_eps.size + 1))
            for i in range(0, flat.size, chunk):
                z = _log_arguments(_q, flat[i:i + chunk], _eps, _cd)
                out[i:i + chunk] = -(np.log(z) @ _w) / (2.0 * math.pi)
            return out.reshape(ts.shape)

        return cls("ising_quench", eval_many,
                   {"h_i": q.h_i, "h_f": q.h_f, "J": q.J, "k_grid": q.k_grid})

    @classmethod
    def from_table(cls, times, values) -> "DynamicalFreeEnergy":
        """Spline through sampled f(t >= 0); first sample must be (0, 0)."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)
        if times[0] != 0.0 or abs(values[0]) > 1e-12:
            raise DomainError("table must start at t = 0 with f(0) = 0")
        if np.any(np.diff(times) <= 0):
            raise DomainError("table times must increase strictly")
        spline = CubicSpline(times, values)

        def eval_many(ts, _s=spline, _tmax=float(times[-1])):
            ts = np.asarray(ts, dtype=float)
            if np.any(np.abs(ts) > _tmax * (1 + 1e-12)):
                raise DomainError("tabulated f evaluated outside its range")
            vals = _s(np.abs(ts))
            return np.where(ts >= 0, vals, np.conj(vals))

        return cls("tabulated", eval_many, {"t_max": float(times[-1])})

    def __call__(self, t):
        """f at scalar or array t; negative times by conjugation."""
        ts = np.asarray(t, dtype=float)
        flat = np.abs(ts).ravel()
        pos = self._eval_many(flat).reshape(ts.shape)
        out = np.where(ts >= 0, pos, np.conj(pos))
        if np.isscalar(t) or ts.ndim == 0:
            return complex(out)
        return out

    def table(self, u_max: float, points_per_unit: int = 4096) -> CubicSpline:
        """Cached spline of f on [0, u_max] for fast bulk evaluation.

        Resolution is fixed per unit time, so a wider cached table serves
        any narrower request of equal or lower density.
        """
        for (cached_umax, cached_ppu), spline in self._tables.items():
            if cached_umax >= u_max * (1 - 1e-12) \
                    and cached_ppu >= 0.9 * points_per_unit:
                return spline
        n = max(129, int(math.ceil(points_per_unit * u_max)) + 1)
        grid = np.linspace(0.0, u_max, n)
        spline = CubicSpline(grid, self._eval_many(grid))
        self._tables[(u_max, points_per_unit)] = spline
        return spline


def second_cumulant_from_f(f: DynamicalFreeEnergy, h0: float = 0.1,
                           levels: int = 5) -> float:
    """Energy variance per site from the curvature of Re f at the origin.

    Central second differences (exploiting f(0) = 0 and the conjugation
    symmetry) with Richardson extrapolation in the step size.
    """
    table = np.empty((levels, levels))
    h = h0
    for i in range(levels):
        table[i, 0] = 2.0 * (f(h)).real / (h * h)
        fac = 1.0
        for j in range(1, i + 1):
            fac *= 4.0
            table[i, j] = (fac * table[i, j - 1] - table[i - 1, j - 1]) \
                / (fac - 1.0)
        h *= 0.5
    best = table[levels - 1, levels - 1]
    prev = table[levels - 2, levels - 2]
    if abs(best - prev) > 1e-6 * max(abs(best), 1e-12) + 1e-10:
        raise AccuracyError("second-derivative extrapolation did not settle",
                            value=best, achieved=abs(best - prev))
    return float(best)


# ---------------------------------------------------------------------------
# Moment quadrature
# ---------------------------------------------------------------------------

def _partial_sum_spread(us: list[np.ndarray]):
    """max(P,0) - min(P,0) over suffix sums P_j of the difference variables."""
    suffix = us[-1]
    hi = np.maximum(suffix, 0.0)
    lo = np.minimum(suffix, 0.0)
    for u in reversed(us[:-1]):
        suffix = u + suffix
        hi = np.maximum(hi, suffix)
        lo = np.minimum(lo, suffix)
    return hi - lo, suffix  # suffix is now P_1 = sum of all u_j


def _rough_e2(f: DynamicalFreeEnergy, t: float) -> float:
    h = 1e-3 * t
    val = 2.0 * (f(h)).real / (h * h)
    return max(val, 1e-12)


_PANEL_CAP = {2: 2000, 3: 220, 4: 20}  # per axis; bounds the tensor size


def _gl_axis(t: float, sigma: float, n_gl: int, alpha: int):
    """Composite Gauss-Legendre nodes/weights on [-t, t], panels ~ sigma."""
    panels_half = max(6, min(_PANEL_CAP[alpha], math.ceil(1.6 * t / sigma)))
    edges = np.linspace(-t, t, 2 * panels_half + 1)
    x, w = np.polynomial.legendre.leggauss(n_gl)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _grid_moment(f, sites, t, alpha, n_gl):
    sigma = 1.0 / math.sqrt(sites * _rough_e2(f, t))
    nodes, weights = _gl_axis(t, sigma, n_gl, alpha)
    spline = f.table((alpha - 1) * t * (1.0 + 1e-9))
    fd = spline(np.abs(nodes))
    fd = np.where(nodes >= 0, fd, np.conj(fd))

    if alpha == 2:
        spread = np.abs(nodes)
        vol = np.maximum(t - spread, 0.0)
        total = np.sum(weights * vol * np.exp(-sites * 2.0 * fd.real
                                              + 0j))
        imag = 0.0
        real = float(np.real(total))
    else:
        total = 0.0 + 0.0j
        n = nodes.size
        chunk = max(1, 4_000_000 // (n * n)) if alpha == 4 else n
        for i0 in range(0, n, chunk):
            sl = slice(i0, i0 + chunk)
            if alpha == 3:
                u1 = nodes[sl][:, None]
                u2 = nodes[None, :]
                s1 = u1 + u2
                spread, _ = _partial_sum_spread([u1 + 0 * u2, 0 * u1 + u2])
                expo = fd[sl][:, None] + fd[None, :]
                wprod = weights[sl][:, None] * weights[None, :]
            else:
                u1 = nodes[sl][:, None, None]
                u2 = nodes[None, :, None]
                u3 = nodes[None, None, :]
                s1 = u1 + u2 + u3
                spread, _ = _partial_sum_spread(
                    [u1 + 0 * u2 + 0 * u3, u2 + 0 * u1 + 0 * u3,
                     u3 + 0 * u1 + 0 * u2])
                expo = (fd[sl][:, None, None] + fd[None, :, None]
                        + fd[None, None, :])
                wprod = (weights[sl][:, None, None] * weights[None, :, None]
                         * weights[None, None, :])
            back = spline(np.abs(s1))
            back = np.where(s1 <= 0, back, np.conj(back))  # f(-s1)
            vol = np.maximum(t - spread, 0.0)
            total += np.sum(wprod * vol * np.exp(-sites * (expo + back)))
        real = float(total.real)
        imag = float(total.imag)
    if abs(imag) > 1e-8 * max(abs(real), 1e-300):
        raise AccuracyError("imaginary part of the moment integrand "
                            "failed to cancel", value=real, achieved=abs(imag))
    return real / t ** alpha


def _mc_moment(f, sites, t, alpha, seed, n_samples):
    dim = alpha - 1
    e2 = _rough_e2(f, t)
    prec = sites * e2 * (np.eye(dim) + np.ones((dim, dim)))
    cov = np.linalg.inv(prec) * 1.3 ** 2
    chol = np.linalg.cholesky(cov)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    spline = f.table((alpha - 1) * t * (1.0 + 1e-9))
    rng = np.random.Generator(np.random.Philox(
        key=np.uint64((int(seed) & 0xFFFFFFFF) << 16 | (alpha << 4) | dim)))

    n_batches = 32
    per_batch = max(256, n_samples // n_batches // 2)  # antithetic pairs
    batch_means = np.empty(n_batches)
    for b in range(n_batches):
        # Latin-hypercube uniforms per dimension, then Gaussian transport
        u = (rng.permuted(np.tile(np.arange(per_batch), (dim, 1)), axis=1).T
             + rng.random((per_batch, dim))) / per_batch
        z = ndtri(np.clip(u, 1e-15, 1 - 1e-15))
        y = z @ chol.T
        vals = np.empty(2 * per_batch)
        for half, pts in enumerate((y, -y)):
            fd = spline(np.abs(pts))
            fd = np.where(pts >= 0, fd, np.conj(fd))
            expo = fd.sum(axis=1)
            s1 = pts.sum(axis=1)
            back = spline(np.abs(s1))
            back = np.where(s1 <= 0, back, np.conj(back))
            spread, _ = _partial_sum_spread([pts[:, j] for j in range(dim)])
            vol = np.maximum(t - spread, 0.0)
            quad = 0.5 * np.einsum("ij,jk,ik->i", pts,
                                   np.linalg.inv(cov), pts)
            log_q = -quad - 0.5 * dim * math.log(2 * math.pi) - 0.5 * log_det
            vals[half * per_batch:(half + 1) * per_batch] = \
                vol * np.exp(-sites * (expo + back) - log_q).real
        batch_means[b] = vals.mean()
    value = float(batch_means.mean()) / t ** alpha
    stderr = float(batch_means.std(ddof=1) / math.sqrt(n_batches)) / t ** alpha
    return value, stderr


def moments_quadrature(f: DynamicalFreeEnergy, L: int, d: int, t: float,
                       alpha: int, scheme: str = "auto", seed: int = 0,
                       rtol: float | None = None,
                       n_gl: int = 8, n_samples: int = 400_000) -> MomentEstimate:
    """Finite-volume moment tr[rho_bar^alpha] from the free energy f.

    The alpha-fold window integral is reduced to alpha-1 dimensions using
    translation invariance (exact chord-length factor), then integrated on
    a tensor Gauss-Legendre grid (`grid`, default for alpha = 2, 3) or by
    stratified antithetic Monte Carlo with a Gaussian importance proposal
    (`mc`, default for alpha = 4). Deterministic for fixed inputs and seed.
    Raises AccuracyError if `rtol` is given and not met.
    """
    if alpha not in (2, 3, 4):
        raise DomainError("alpha must be one of 2, 3, 4")
    if t <= 0:
        raise DomainError("t must be positive")
    if scheme == "auto":
        scheme = "grid" if alpha <= 3 else "mc"
    if scheme not in ("grid", "mc"):
        raise DomainError(f"unknown scheme {scheme!r}")
    sites = float(L) ** d

    if scheme == "grid":
        value = _grid_moment(f, sites, t, alpha, n_gl)
        check = _grid_moment(f, sites, t, alpha, n_gl - 3)
        err = abs(value - check) + 1e-13 * abs(value)
    else:
        value, err = _mc_moment(f, sites, t, alpha, seed, n_samples)

    if value > 1.0 and value - 1.0 < 1e-9:
        value = 1.0
    if rtol is not None and err > rtol * abs(value):
        raise AccuracyError(
            f"moment accuracy {err / max(abs(value), 1e-300):.2e} "
            f"above target {rtol:.2e}", value=value, achieved=err)
    return MomentEstimate(value=value, error=err)


def renyi_quadrature(f: DynamicalFreeEnergy, L: int, d: int, t: float,
                     alpha: int, scheme: str = "auto", seed: int = 0,
                     rtol: float | None = None, **kw) -> RenyiEstimate:
    """Renyi entropy S_alpha = log(tr[rho_bar^alpha])/(1-alpha) from
    `moments_quadrature`, with the moment error propagated through the log.
    """
    est = moments_quadrature(f, L, d, t, alpha, scheme=scheme, seed=seed,
                             rtol=rtol, **kw)
    value = math.log(est.value) / (1.0 - alpha)
    err = est.error / (abs(1.0 - alpha) * est.value)
    return RenyiEstimate(value=value, error=err)
