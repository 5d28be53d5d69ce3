"""Closed-form large-volume results for the time-averaged state.

For a lattice of L^d sites with extensive energy cumulants, the moments of
the state averaged over a window of width t behave as

    tr[rho_bar^alpha] ~ alpha^{-1/2} (e2/2pi)^{(1-alpha)/2} t^{1-alpha}
                        L^{d(1-alpha)/2},

with e2 the energy variance per site. Everything else follows: Renyi and von
Neumann entropies, the universal eigenvalue law Pi(x) = theta(1-x)/
sqrt(-pi log x) in the rescaled variable x = Omega t lambda with
Omega = sqrt(e2/2pi) L^{d/2}, the effective rank

    D_eps = sqrt(2 e2)/pi * erfinv(1 - eps) * L^{d/2} t,

the leading O(L^{-d/2}) moment corrections, and the nonuniform-weight
generalizations of all of the above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import quad as scipy_quad

from .errors import DomainError, NoSolutionError, SingularPointError
from .special import (
    adaptive_simpson,
    correction_integral,
    erf,
    erf_inv,
    erf_inv_tail_expansion,
)

__all__ = [
    "CumulantSeries",
    "WeightFunction",
    "DistributionPoint",
    "RankQuery",
    "RankSolution",
    "WeightedRankSolution",
    "moment_asymptotic",
    "moment_with_correction",
    "renyi_asymptotic",
    "von_neumann_asymptotic",
    "eigenvalue_distribution",
    "phi_density",
    "pi_universal",
    "eigenvalue_count_above",
    "support_edge",
    "distribution_point",
    "solve_rank_system",
    "rank_small_eps",
    "rank_timesliced",
    "mandelstam_tamm_bound",
    "weighted_renyi",
    "weighted_von_neumann",
    "weighted_phi_density",
    "weighted_rank_system",
    "ramp_weight",
    "cosine_bump_weight",
    "truncated_exponential_weight",
]

_SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CumulantSeries:
    """Per-site energy cumulants e_1..e_n plus the lattice geometry.

    The second cumulant (energy variance per site) must be positive; it is
    the only physical input of the leading-order formulas.
    """

    e: tuple[float, ...]
    L: int
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "e", tuple(float(v) for v in self.e))
        if len(self.e) < 2:
            raise DomainError("need at least cumulants e1, e2")
        if self.e[1] <= 0:
            raise DomainError(f"e2 must be positive, got {self.e[1]}")
        if self.L < 1 or self.d < 1:
            raise DomainError("L and d must be positive integers")

    @property
    def e2(self) -> float:
        return self.e[1]

    @property
    def sites(self) -> float:
        return float(self.L) ** self.d

    @property
    def omega(self) -> float:
        """Eigenvalue scale Omega = sqrt(e2/2pi) L^{d/2}."""
        return math.sqrt(self.e2 / (2.0 * math.pi)) * self.L ** (self.d / 2.0)


@dataclass(frozen=True)
class WeightFunction:
    """Probability density on [0, t] used for nonuniform time averages.

    Construct through :meth:`uniform`, :meth:`from_table` or
    :meth:`from_callable`; the constructor checks normalization by
    quadrature. Tabulated densities are interpolated linearly and expose
    their nodes as quadrature breakpoints.
    """

    t: float
    density: Callable[[float], float]
    kind: str  # uniform | tabulated | closure
    breakpoints: tuple[float, ...] = field(default=())
    _sup: float = 0.0

    def __post_init__(self):
        if self.t <= 0:
            raise DomainError("window width t must be positive")
        if self.kind not in ("uniform", "tabulated", "closure"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        norm = adaptive_simpson(self.density, 0.0, self.t, tol=1e-12,
                                breakpoints=self.breakpoints)
        if abs(norm - 1.0) > 1e-10:
            raise DomainError(
                f"weight density integrates to {norm!r}, not 1 within 1e-10")

    @classmethod
    def uniform(cls, t: float) -> "WeightFunction":
        t = float(t)
        return cls(t=t, density=lambda tau: 1.0 / t, kind="uniform",
                   _sup=1.0 / t)

    @classmethod
    def from_table(cls, times: Sequence[float], values: Sequence[float],
                   normalize: bool = True) -> "WeightFunction":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise DomainError("times and values must be equal-length 1-D")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise DomainError("times must start at 0 and increase strictly")
        if np.any(values < 0):
            raise DomainError("density values must be nonnegative")
        if normalize:
            area = np.trapezoid(values, times)
            if area <= 0:
                raise DomainError("tabulated density has zero mass")
            values = values / area

        def density(tau: float, _t=times, _v=values) -> float:
            return float(np.interp(tau, _t, _v))

        return cls(t=float(times[-1]), density=density, kind="tabulated",
                   breakpoints=tuple(times[1:-1]), _sup=float(values.max()))

    @classmethod
    def from_callable(cls, t: float, density: Callable[[float], float],
                      breakpoints: Sequence[float] = ()) -> "WeightFunction":
        t = float(t)
        grid = np.linspace(0.0, t, 4097)
        sup = max(density(float(x)) for x in grid)
        return cls(t=t, density=density, kind="closure",
                   breakpoints=tuple(breakpoints), _sup=sup)

    @property
    def sup(self) -> float:
        """Largest density value (exact for uniform/tabulated, sampled else)."""
        return self._sup


@dataclass(frozen=True)
class DistributionPoint:
    """One point of the rescaled eigenvalue law: p = Omega * lambda."""

    lam: float
    scaled_p: float
    phi_density: float


@dataclass(frozen=True)
class RankQuery:
    """Truncation error, window width and (spectrum-irrelevant) start time."""

    epsilon: float
    t: float
    t0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if self.t <= 0:
            raise DomainError("window width t must be positive")


class RankSolution(NamedTuple):
    x_eps: float
    lambda_eps: float
    D: float


class WeightedRankSolution(NamedTuple):
    p_eps: float
    D: float


# ---------------------------------------------------------------------------
# Moments and entropies
# ---------------------------------------------------------------------------

def moment_asymptotic(cs: CumulantSeries, t: float, alpha: int) -> float:
    """Leading large-L moment tr[rho_bar^alpha]; equals 1 at alpha = 1."""
    if alpha < 1:
        raise DomainError("alpha must be >= 1")
    a = float(alpha)
    return (a ** -0.5 * (cs.e2 / (2.0 * math.pi)) ** ((1.0 - a) / 2.0)
            * t ** (1.0 - a) * cs.sites ** ((1.0 - a) / 2.0))


@lru_cache(maxsize=64)
def _correction_value(alpha: int, rng_seed: int) -> tuple[float, float]:
    est = correction_integral(alpha, rng_seed)
    return (est.value, est.error)


def _relative_correction(cs: CumulantSeries, t: float, alpha: int,
                         rng_seed: int) -> float:
    """(magnitude of the leading correction) / (leading moment)."""
    i_alpha, _ = _correction_value(int(alpha), int(rng_seed))
    corr = 2.0 * cs.e2 ** (-alpha / 2.0) * t ** (-alpha) \
        * cs.sites ** (-alpha / 2.0) * i_alpha
    return corr / moment_asymptotic(cs, t, alpha)


def moment_with_correction(cs: CumulantSeries, t: float, alpha: int,
                           rng_seed: int = 0) -> float:
    """Moment including the O(L^{-d/2}) correction from the boundary term.

    tr[rho_bar^alpha] ~ m_alpha - 2 e2^{-alpha/2} t^{-alpha} L^{-d alpha/2}
    I_alpha, with I_alpha the coupled Gaussian integral (I_2 = 1/2).
    """
    if int(alpha) != alpha or alpha < 2:
        raise DomainError("correction defined for integer alpha >= 2")
    i_alpha, _ = _correction_value(int(alpha), int(rng_seed))
    lead = moment_asymptotic(cs, t, alpha)
    return lead - 2.0 * cs.e2 ** (-alpha / 2.0) * t ** (-alpha) \
        * cs.sites ** (-alpha / 2.0) * i_alpha


def renyi_asymptotic(cs: CumulantSeries, t: float, alpha: float,
                     with_correction: bool = False,
                     rng_seed: int = 0) -> float:
    """Renyi entropy S_alpha of the time-averaged state at leading order.

    (d/2) log L + (1/2) log(e2 t^2 / 2pi) + log(alpha)/(2(alpha-1)); with
    `with_correction` the relative moment correction delta_alpha is folded
    in through -(1/(1-alpha)) log(1 + delta_alpha).
    """
    if alpha <= 0 or alpha == 1.0:
        raise DomainError("alpha must be positive and != 1 "
                          "(use von_neumann_asymptotic at alpha = 1)")
    s = (cs.d / 2.0) * math.log(cs.L) \
        + 0.5 * math.log(cs.e2 * t * t / (2.0 * math.pi)) \
        + math.log(alpha) / (2.0 * (alpha - 1.0))
    if with_correction:
        if int(alpha) != alpha or alpha < 2:
            raise DomainError("correction defined for integer alpha >= 2")
        delta = _relative_correction(cs, t, int(alpha), rng_seed)
        s -= math.log1p(delta) / (1.0 - alpha)
    return s


def von_neumann_asymptotic(cs: CumulantSeries, t: float) -> float:
    """Replica limit alpha -> 1 of the Renyi entropies."""
    return (cs.d / 2.0) * math.log(cs.L) \
        + 0.5 * math.log(cs.e2 * t * t / (2.0 * math.pi)) + 0.5


# ---------------------------------------------------------------------------
# Eigenvalue distribution
# ---------------------------------------------------------------------------

def support_edge(cs: CumulantSeries, t: float) -> float:
    """Largest eigenvalue carried by the asymptotic law: 1/(Omega t)."""
    if t <= 0:
        raise DomainError("t must be positive")
    return 1.0 / (cs.omega * t)


def eigenvalue_distribution(cs: CumulantSeries, t: float, lam: float) -> float:
    """Asymptotic eigenvalue density P(lambda) of the time-averaged state.

    P = (L^{d/2} t / (pi lambda)) sqrt(e2 / log(2pi/(e2 L^d t^2 lambda^2)))
    below the support edge and zero above it. The density itself is not
    normalizable at lambda -> 0; lambda P(lambda) is (see `phi_density`).
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    edge = support_edge(cs, t)
    if lam == edge:
        raise SingularPointError("P(lambda) diverges at the support edge")
    if lam > edge:
        return 0.0
    log_term = math.log(2.0 * math.pi / (cs.e2 * cs.sites * t * t * lam * lam))
    return (cs.sites ** 0.5 * t / (math.pi * lam)) * math.sqrt(cs.e2 / log_term)


def pi_universal(x: float) -> float:
    """Universal rescaled law Pi(x) = theta(1-x)/sqrt(-pi log x)."""
    if x <= 0:
        raise DomainError("x must be positive")
    if x == 1.0:
        raise SingularPointError("Pi diverges at x = 1")
    if x > 1.0:
        return 0.0
    return 1.0 / math.sqrt(-math.pi * math.log(x))


def phi_density(cs: CumulantSeries, t: float, lam: float) -> float:
    """Probability-weighted density Phi(lambda) = lambda P(lambda).

    Equals Omega t Pi(Omega t lambda), which integrates to one.
    """
    x = cs.omega * t * lam
    return cs.omega * t * pi_universal(x)


def eigenvalue_count_above(cs: CumulantSeries, t: float, lam: float) -> float:
    """Asymptotic number of eigenvalues exceeding lambda.

    Integrating P from lambda to the support edge gives
    (2 Omega t / sqrt(pi)) sqrt(-log(Omega t lambda)).
    """
    x = cs.omega * t * lam
    if x <= 0:
        raise DomainError("lambda must be positive")
    if x >= 1.0:
        return 0.0
    return 2.0 * cs.omega * t / _SQRT_PI * math.sqrt(-math.log(x))


def distribution_point(cs: CumulantSeries, lam: float,
                       t: float | None = None,
                       w: WeightFunction | None = None) -> DistributionPoint:
    """Record (lambda, p = Omega lambda, Phi) for a uniform or weighted law."""
    if (t is None) == (w is None):
        raise DomainError("provide exactly one of t or w")
    if w is None:
        phi = phi_density(cs, t, lam)
    else:
        phi = weighted_phi_density(cs, w, lam)
    return DistributionPoint(lam=lam, scaled_p=cs.omega * lam,
                             phi_density=phi)


# ---------------------------------------------------------------------------
# Effective rank
# ---------------------------------------------------------------------------

def solve_rank_system(cs: CumulantSeries, query: RankQuery) -> RankSolution:
    """Cutoff/rank pair for truncation error eps on the averaged state.

    eps = 1 - erf(sqrt(-log x_eps)) fixes the rescaled cutoff
    x_eps = exp(-(erfinv(1-eps))^2); the physical cutoff is
    lambda_eps = x_eps/(Omega t) and the retained dimension is
    D = sqrt(2 e2)/pi * erfinv(1-eps) * L^{d/2} t.
    """
    u = erf_inv(1.0 - query.epsilon)  # sqrt(-log x_eps)
    x_eps = math.exp(-u * u)
    lam_eps = x_eps / (cs.omega * query.t)
    dim = math.sqrt(2.0 * cs.e2) / math.pi * u \
        * cs.L ** (cs.d / 2.0) * query.t
    return RankSolution(x_eps=x_eps, lambda_eps=lam_eps, D=dim)


def rank_small_eps(cs: CumulantSeries, t: float, eps: float) -> float:
    """Small-eps closed form of the effective rank.

    sqrt(e2)/pi * sqrt(-log(-(pi eps^2/2) log(pi eps^2/2))) * L^{d/2} t;
    same domain restriction as the erf^{-1} tail expansion.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0,1)")
    erf_inv_tail_expansion(eps)  # domain gate: raises if eps too large
    v = math.pi * eps * eps / 2.0
    return math.sqrt(cs.e2) / math.pi \
        * math.sqrt(-math.log(-v * math.log(v))) \
        * cs.L ** (cs.d / 2.0) * t


def rank_timesliced(cs: CumulantSeries, t: float, delta_t: float,
                    eps_delta: float) -> float:
    """Rank bound from slicing [0,t] into windows of width delta_t.

    Assuming independent truncation errors across slices, the effective
    error is eps_delta sqrt(delta_t/t); this is the intermediate bound, the
    final estimate keeps eps unrescaled (the independence assumption is
    ultimately not satisfied).
    """
    if not 0.0 < delta_t <= t:
        raise DomainError("need 0 < delta_t <= t")
    eff = eps_delta * math.sqrt(delta_t / t)
    if not 0.0 < eff < 1.0:
        raise DomainError(f"effective epsilon {eff} outside (0,1)")
    return math.sqrt(2.0 * cs.e2) / math.pi * erf_inv(1.0 - eff) \
        * cs.L ** (cs.d / 2.0) * t


def mandelstam_tamm_bound(cs: CumulantSeries) -> float:
    """Quantum-speed-limit time pi L^{-d/2} / (2 sqrt(e2))."""
    return math.pi * cs.sites ** -0.5 / (2.0 * math.sqrt(cs.e2))


# ---------------------------------------------------------------------------
# Nonuniform averages
# ---------------------------------------------------------------------------

def _weight_power_integral(w: WeightFunction, alpha: float) -> float:
    return adaptive_simpson(lambda tau: w.density(tau) ** alpha, 0.0, w.t,
                            tol=1e-12, breakpoints=w.breakpoints)


def weighted_renyi(cs: CumulantSeries, w: WeightFunction,
                   alpha: float) -> float:
    """Renyi entropy under a nonuniform window weight.

    (d/2) log L + (1/2) log(e2/2pi) + log(alpha)/(2(alpha-1))
    + (1/(1-alpha)) log int_0^t w(tau)^alpha dtau; the uniform weight
    reproduces the plain result with t^2 absorbed into the middle log.
    """
    if alpha <= 0 or alpha == 1.0:
        raise DomainError("alpha must be positive and != 1")
    pw = _weight_power_integral(w, alpha)
    return (cs.d / 2.0) * math.log(cs.L) \
        + 0.5 * math.log(cs.e2 / (2.0 * math.pi)) \
        + math.log(alpha) / (2.0 * (alpha - 1.0)) \
        + math.log(pw) / (1.0 - alpha)


def weighted_von_neumann(cs: CumulantSeries, w: WeightFunction) -> float:
    """Von Neumann entropy under a nonuniform weight; maximal for uniform.

    Adds the differential entropy -int w log w to the volume and variance
    terms.
    """
    def integrand(tau: float) -> float:
        val = w.density(tau)
        return val * math.log(val) if val > 0.0 else 0.0

    ent = -adaptive_simpson(integrand, 0.0, w.t, tol=1e-12,
                            breakpoints=w.breakpoints)
    return (cs.d / 2.0) * math.log(cs.L) \
        + 0.5 * math.log(cs.e2 / (2.0 * math.pi)) + 0.5 + ent


def _density_crossings(w: WeightFunction, p: float, n_scan: int = 2048) -> list[float]:
    """Times where the density crosses level p, refined by bisection."""
    taus = np.linspace(0.0, w.t, n_scan + 1)
    vals = np.array([w.density(float(tau)) for tau in taus]) - p
    out = []
    for i in range(n_scan):
        if vals[i] == 0.0:
            out.append(float(taus[i]))
            continue
        if vals[i] * vals[i + 1] < 0.0:
            lo, hi = float(taus[i]), float(taus[i + 1])
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if (w.density(mid) - p) * vals[i] > 0.0:
                    lo = mid
                else:
                    hi = mid
            out.append(0.5 * (lo + hi))
    return out


def weighted_phi_density(cs: CumulantSeries, w: WeightFunction,
                         lam: float) -> float:
    """Probability-weighted eigenvalue density under weight w.

    Phi(lambda) = Omega int_0^t dtau theta(w(tau) - p)
    / sqrt(pi log(w(tau)/p)) at p = Omega lambda; reduces to
    Omega t Pi(Omega t lambda) for the uniform weight. The integrand has
    integrable 1/sqrt singularities where the density crosses p, so those
    points are located first and passed to QUADPACK.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    p = cs.omega * lam
    if p >= w.sup:
        return 0.0

    def integrand(tau: float) -> float:
        val = w.density(tau)
        if val <= p:
            return 0.0
        arg = math.log(val / p)
        if arg <= 0.0:
            return 0.0
        return 1.0 / math.sqrt(math.pi * arg)

    points = sorted(set(_density_crossings(w, p))
                    | {bp for bp in w.breakpoints})
    value, _ = scipy_quad(integrand, 0.0, w.t,
                          points=points or None, limit=400)
    return cs.omega * value


def _weighted_discarded(w: WeightFunction, p: float) -> float:
    """Probability mass below an eigenvalue cutoff p (rescaled units)."""
    if p <= 0.0:
        return 0.0

    def integrand(tau: float) -> float:
        val = w.density(tau)
        if val <= 0.0:
            return 0.0
        ratio = min(p / val, 1.0)
        if ratio >= 1.0:
            return val
        return val * (1.0 - erf(math.sqrt(-math.log(ratio))))

    return adaptive_simpson(integrand, 0.0, w.t, tol=1e-11,
                            breakpoints=w.breakpoints)


def weighted_rank_system(cs: CumulantSeries, w: WeightFunction,
                         eps: float) -> WeightedRankSolution:
    """Cutoff p_eps and dimension D for a nonuniform average.

    Solves eps = int_0^t dtau w(tau)[1 - erf(sqrt(-log min(p/w(tau),1)))]
    for p_eps by monotone bisection, then evaluates

        D = (2 Omega / sqrt(pi)) int_0^t dtau theta(min(w,Omega) - p_eps)
            [sqrt(log(w/p_eps)) - sqrt(log max(w/Omega, 1))].

    The uniform weight reproduces the plain rank system with p = x/t.
    """
    if not 0.0 < eps < 1.0:
        raise NoSolutionError("eps must lie in (0,1)")
    hi = w.sup
    if hi <= 0.0:
        raise NoSolutionError("weight has no mass")
    if _weighted_discarded(w, hi) < eps - 1e-12:
        raise NoSolutionError(
            f"eps={eps} not reachable below the density supremum")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _weighted_discarded(w, mid) < eps:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(hi, 1e-300):
            break
    p_eps = 0.5 * (lo + hi)

    omega = cs.omega

    def integrand(tau: float) -> float:
        val = w.density(tau)
        if min(val, omega) <= p_eps:
            return 0.0
        out = math.sqrt(math.log(val / p_eps))
        if val > omega:
            out -= math.sqrt(math.log(val / omega))
        return out

    dim = 2.0 * omega / _SQRT_PI * adaptive_simpson(
        integrand, 0.0, w.t, tol=1e-11, breakpoints=w.breakpoints)
    return WeightedRankSolution(p_eps=p_eps, D=dim)


# ---------------------------------------------------------------------------
# Bundled nonuniform densities (normalized on [0, t])
# ---------------------------------------------------------------------------

def ramp_weight(t: float) -> WeightFunction:
    """Linearly increasing density 2 tau / t^2."""
    t = float(t)
    return WeightFunction.from_callable(t, lambda tau: 2.0 * tau / (t * t))


def cosine_bump_weight(t: float) -> WeightFunction:
    """Raised-cosine density (1 - cos(2 pi tau/t)) / t."""
    t = float(t)
    return WeightFunction.from_callable(
        t, lambda tau: (1.0 - math.cos(2.0 * math.pi * tau / t)) / t)


def truncated_exponential_weight(t: float, rate: float = 2.0) -> WeightFunction:
    """Front-loaded density rate e^{-rate tau} / (1 - e^{-rate t})."""
    t = float(t)
    norm = 1.0 - math.exp(-rate * t)
    return WeightFunction.from_callable(
        t, lambda tau: rate * math.exp(-rate * tau) / norm)
