"""Bose-Einstein occupancy over a discrete level spectrum.

A spectrum is a strictly increasing list of levels x_i with positive
multiplicities q_i.  The expected occupancy of a level under parameters
(beta, nu) is q / (exp(beta x - nu) - 1), defined whenever
beta x - nu > 0 for every level.  The module provides the occupancy and
its partial sums, the one- and two-constraint solvers for (nu) and
(beta, nu), the log grand partition function and its nu-derivatives,
a saddle-point (Laplace) estimate of the canonical partition function
ln Z(beta, N), the Planck-type spectral density for general dimension,
and the D = -1 rank-curve model used by the fitting pipeline.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, DomainError, ValidationError

# Solver tolerances (relative residuals); chosen well below every
# downstream acceptance threshold.
NU_TOL = 1e-10
BETA_NU_TOL = 1e-8
QUAD_TOL = 1e-10

# Solvers never let beta*x_min - nu shrink below this gap (condensate guard).
CONDENSATE_GAP = 1e-13


@dataclass(frozen=True, eq=False)
class LevelSpectrum:
    """Levels x (strictly increasing) with positive multiplicities q."""

    x: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        q = np.asarray(self.q, dtype=float).copy()
        if x.ndim != 1 or q.ndim != 1 or x.shape != q.shape or x.size == 0:
            raise ValidationError("spectrum needs matching 1-D x and q with s >= 1")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(q))):
            raise ValidationError("spectrum values must be finite")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("levels x_i must be strictly increasing")
        if np.any(q <= 0):
            raise ValidationError("multiplicities q_i must be positive")
        x.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "q", q)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        if not pairs:
            raise ValidationError("spectrum needs at least one level")
        xs, qs = zip(*pairs)
        return cls(np.array(xs, dtype=float), np.array(qs, dtype=float))

    @property
    def s(self) -> int:
        return int(self.x.size)

    @property
    def Q(self) -> float:
        return float(self.q.sum())

    @property
    def xbar(self) -> float:
        return float((self.q * self.x).sum() / self.q.sum())

    @property
    def x_min(self) -> float:
        return float(self.x[0])

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    def levels(self):
        return list(zip(self.x.tolist(), self.q.tolist()))


@dataclass(frozen=True)
class BoseParams:
    """Inverse-temperature-like beta and chemical-potential-like nu."""

    beta: float
    nu: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and math.isfinite(self.nu)):
            raise ValidationError("beta and nu must be finite")

    def gap(self, spec: LevelSpectrum) -> float:
        """min_i (beta x_i - nu); parameters are valid for spec iff > 0."""
        return float(np.min(self.beta * spec.x - self.nu))


@dataclass(frozen=True)
class EnsembleConstraints:
    """Total count N and energy budget E; M = E/N is the mean constraint."""

    n_total: int
    energy: float

    def __post_init__(self):
        if self.n_total != int(self.n_total) or self.n_total < 1:
            raise ValidationError(f"N must be a positive integer, got {self.n_total!r}")
        if not math.isfinite(self.energy):
            raise ValidationError("energy budget must be finite")
        object.__setattr__(self, "n_total", int(self.n_total))
        object.__setattr__(self, "energy", float(self.energy))

    @property
    def mean(self) -> float:
        return self.energy / self.n_total

    def check_admissible(self, spec: LevelSpectrum):
        """N x_min <= E <= N xbar; raises DomainError outside."""
        n, e = self.n_total, self.energy
        lo, hi = n * spec.x_min, n * spec.xbar
        if not (lo <= e <= hi * (1 + 1e-12) + 1e-12):
            raise DomainError(
                f"inadmissible constraints: need N*x_min <= E <= N*xbar, "
                f"got E={e} outside [{lo}, {hi}]"
            )


def _occupancies(spec: LevelSpectrum, params: BoseParams) -> np.ndarray:
    t = params.beta * spec.x - params.nu
    if np.any(t <= 0):
        raise DomainError(
            f"non-physical regime: beta*x - nu must be positive on every level "
            f"(min gap {float(np.min(t)):.3e})"
        )
    # q e^{-t} / (1 - e^{-t}): stable for both tiny and large t.
    with np.errstate(under="ignore"):
        em = np.exp(-t)
        return spec.q * em / (-np.expm1(-t))


def occupation(level, params: BoseParams) -> float:
    """Expected occupancy q / (exp(beta x - nu) - 1) of a single level."""
    x, q = level
    if q <= 0:
        raise DomainError("multiplicity must be positive")
    t = params.beta * x - params.nu
    if t <= 0:
        raise DomainError(f"non-physical regime: beta*x - nu = {t} <= 0")
    return q * math.exp(-t) / (-math.expm1(-t))


def cumulative(spec: LevelSpectrum, params: BoseParams, l: int) -> float:
    """Partial sum B_l of the occupancies of the first l levels (1-based)."""
    if l != int(l) or not (1 <= l <= spec.s):
        raise DomainError(f"cut index l must be in 1..{spec.s}, got {l!r}")
    return float(_occupancies(spec, params)[: int(l)].sum())


def total_occupation(spec: LevelSpectrum, params: BoseParams) -> float:
    """B_s, the sum of all occupancies."""
    return float(_occupancies(spec, params).sum())


def energy_sum(spec: LevelSpectrum, params: BoseParams) -> float:
    """Sum of x_i times the occupancy of level i."""
    return float((_occupancies(spec, params) * spec.x).sum())


def solve_nu(spec: LevelSpectrum, beta: float, n_total: float, tol: float = NU_TOL) -> float:
    """The unique nu with sum_i q_i/(exp(beta x_i - nu) - 1) = N.

    The occupancy sum is strictly increasing in nu on (-inf, min_i beta x_i)
    and spans (0, inf), so bisection brackets always exist.  The returned
    nu satisfies |sum - N| <= tol * N.
    """
    if not (n_total > 0 and math.isfinite(n_total)):
        raise DomainError(f"N must be positive and finite, got {n_total!r}")
    if not math.isfinite(beta):
        raise DomainError("beta must be finite")

    t_min = float(np.min(beta * spec.x))
    nu_hi = t_min - CONDENSATE_GAP

    def surplus(nu):
        return total_occupation(spec, BoseParams(beta, nu)) - n_total

    hi_val = surplus(nu_hi)
    if hi_val < 0:
        raise ConvergenceError(
            "target N unreachable below the condensate clamp",
            bracket=(None, nu_hi),
            residual=hi_val / n_total,
        )

    step = 1.0
    nu_lo = t_min - step
    for _ in range(200):
        if surplus(nu_lo) < 0:
            break
        step *= 2.0
        nu_lo = t_min - step
    else:
        raise ConvergenceError("failed to bracket nu from below", bracket=(nu_lo, nu_hi))

    nu = float(optimize.brentq(surplus, nu_lo, nu_hi, xtol=1e-14, rtol=8.9e-16, maxiter=200))

    # Newton polish: the derivative of the occupancy sum in nu is the
    # second nu-derivative of log zeta, available in closed form.
    for _ in range(6):
        res = surplus(nu)
        if abs(res) <= tol * n_total:
            break
        slope = log_zeta_d2(spec, BoseParams(beta, nu))
        nu_next = nu - res / slope
        if not (nu_lo < nu_next < nu_hi):
            break
        nu = nu_next
    res = surplus(nu)
    if abs(res) > tol * n_total:
        raise ConvergenceError(
            "solve_nu residual above tolerance",
            bracket=(nu_lo, nu_hi),
            residual=res / n_total,
        )
    return nu


def solve_beta_nu(spec: LevelSpectrum, cons: EnsembleConstraints, tol: float = BETA_NU_TOL) -> BoseParams:
    """(beta', nu') with B_s = N and energy sum = E.

    Outer 1-D bracket search over beta with the nu-constraint solved
    exactly inside; the energy at fixed B_s = N decreases from N*xbar at
    beta = 0 toward N*x_min as beta grows, which yields the bracket.
    Requires N*x_min < E <= N*xbar.
    """
    cons.check_admissible(spec)
    n, e = cons.n_total, cons.energy
    if spec.s == 1:
        raise DomainError("energy constraint is degenerate for a single level")
    if e <= n * spec.x_min:
        raise DomainError("E = N*x_min admits no finite beta (ground-state condensate)")

    def energy_at(beta):
        nu = solve_nu(spec, beta, n)
        return energy_sum(spec, BoseParams(beta, nu)) - e

    f0 = energy_at(0.0)
    if f0 < 0:
        raise DomainError("E > N*xbar requires negative beta (outside the admissible regime)")

    # Expand [0, hi] by doubling; U(beta) is monotone decreasing, but fall
    # back to a grid scan for a sign change if doubling ever fails.
    span = max(spec.x_max - spec.x_min, 1e-12)
    hi = 1.0 / span
    bracket = None
    for _ in range(200):
        if energy_at(hi) <= 0:
            bracket = (0.0, hi)
            break
        hi *= 2.0
    if bracket is None:
        grid = np.logspace(-9, 9, 400) / span
        prev_b, prev_v = 0.0, f0
        for b in grid:
            v = energy_at(b)
            if v <= 0:
                bracket = (prev_b, b)
                break
            prev_b, prev_v = b, v
        if bracket is None:
            raise ConvergenceError(
                "failed to bracket beta",
                bracket=(0.0, hi),
                residual=prev_v / max(abs(e), 1.0),
            )

    beta = float(optimize.brentq(energy_at, *bracket, xtol=1e-14, rtol=8.9e-16, maxiter=300))
    nu = solve_nu(spec, beta, n)
    params = BoseParams(beta, nu)

    res_n = (total_occupation(spec, params) - n) / n
    res_e = (energy_sum(spec, params) - e) / max(abs(e), 1e-300)
    if abs(res_n) > tol or abs(res_e) > tol:
        raise ConvergenceError(
            "solve_beta_nu residuals above tolerance",
            bracket=bracket,
            residual=(res_n, res_e),
        )
    return params


def log_zeta(spec: LevelSpectrum, params: BoseParams) -> float:
    """ln zeta_s(beta, nu) = -sum_i q_i ln(1 - exp(nu - beta x_i))."""
    t = params.beta * spec.x - params.nu
    if np.any(t <= 0):
        raise DomainError("log_zeta requires exp(nu - beta x_i) < 1 on every level")
    with np.errstate(under="ignore"):
        return float(-(spec.q * np.log1p(-np.exp(-t))).sum())


def log_zeta_d2(spec: LevelSpectrum, params: BoseParams) -> float:
    """Second nu-derivative of ln zeta_s: sum q e^t/(e^t - 1)^2 > 0."""
    t = params.beta * spec.x - params.nu
    if np.any(t <= 0):
        raise DomainError("log_zeta_d2 requires exp(nu - beta x_i) < 1 on every level")
    with np.errstate(under="ignore"):
        em = np.exp(-t)
        return float((spec.q * em / np.expm1(-t) ** 2).sum())


def partition_saddle(spec: LevelSpectrum, beta: float, n_total: int) -> float:
    """Laplace estimate of ln Z(beta, N) at the real stationary point.

    nu is pinned by the occupancy constraint B_s = N; the estimate is
    ln Z ~ -nu N + ln zeta_s - (1/2) ln(2 pi d2) with d2 the second
    nu-derivative of ln zeta_s.
    """
    if n_total != int(n_total) or n_total < 1:
        raise DomainError(f"N must be a positive integer, got {n_total!r}")
    nu = solve_nu(spec, beta, n_total)
    params = BoseParams(beta, nu)
    d2 = log_zeta_d2(spec, params)
    return -nu * n_total + log_zeta(spec, params) - 0.5 * math.log(2.0 * math.pi * d2)


def planck_density(omega: float, beta: float, dim: float) -> float:
    """Spectral density omega^D / (exp(beta omega) - 1), unit constant."""
    if not (omega > 0):
        raise DomainError(f"omega must be positive, got {omega!r}")
    if not (beta > 0):
        raise DomainError(f"beta must be positive, got {beta!r}")
    t = beta * omega
    if t > 700.0:
        return omega**dim * math.exp(-t)
    return omega**dim / math.expm1(t)


def _bose_factor(t: float) -> float:
    """1 / (exp(t) - 1) for t > 0, stable at both ends."""
    return math.exp(-t) / (-math.expm1(-t))


RANK_MODEL_MODES = ("discrete", "quadrature", "closed-beta0")


def rank_model_neg1(
    omega: float,
    alpha: float,
    params: BoseParams,
    C: float,
    mode: str = "discrete",
) -> float:
    """D = -1 rank model: cumulative hole count up to frequency omega.

    discrete:      C * sum_{i=2}^{floor(alpha omega)} 1/(i(i-1)(e^{beta i - nu}-1))
    quadrature:    C * int_{2/alpha}^{omega} du /(alpha u (alpha u - 1)(e^{beta alpha u - nu}-1))
    closed-beta0:  the quadrature integral in closed form, beta = 0 only.

    Requires alpha*omega > 2 (above the pole region i in {0, 1}) and
    2*beta - nu > 0 so every contributing level has positive occupancy.
    """
    if mode not in RANK_MODEL_MODES:
        raise DomainError(f"unknown rank model mode {mode!r}")
    if not (alpha > 0 and C > 0):
        raise DomainError("alpha and C must be positive")
    if params.beta < 0:
        raise DomainError("rank model requires beta >= 0")
    if not (alpha * omega > 2.0):
        raise DomainError(f"alpha*omega must exceed 2, got {alpha * omega}")
    if not (2.0 * params.beta - params.nu > 0):
        raise DomainError("need 2*beta - nu > 0 (first contributing level i = 2)")

    beta, nu = params.beta, params.nu
    if mode == "discrete":
        top = math.floor(alpha * omega)
        total = 0.0
        for i in range(2, top + 1):
            total += _bose_factor(beta * i - nu) / (i * (i - 1))
        return C * total

    if mode == "quadrature":
        def integrand(u):
            au = alpha * u
            return _bose_factor(beta * au - nu) / (au * (au - 1.0))

        value, _ = integrate.quad(
            integrand, 2.0 / alpha, omega, epsabs=1e-14, epsrel=QUAD_TOL, limit=200
        )
        return C * value

    # closed-beta0
    if beta != 0.0:
        raise DomainError("closed-beta0 mode requires beta = 0")
    scale = C / (alpha * math.expm1(-nu))
    return scale * (math.log((alpha * omega - 1.0) / omega) - math.log(alpha / 2.0))
