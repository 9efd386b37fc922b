"""Two-point calibration of the D = -1 rank model and the alpha sweep.

The model rank_model_neg1(omega; alpha, beta, nu, C) is fixed at one
scale constant alpha and calibrated so the curve passes exactly through
two chosen empirical points (omega1, R1) and (omega2, R2): the ratio
R2/R1 is free of C and pins nu by a monotone 1-D root-find, after which
C follows linearly.  The mean quadratic error sigma is the root mean
square distance between the curve and the calibrated model over the
surviving points, and the alpha sweep tabulates sigma over a grid to
pick the best scale constant.

At beta = 0 the occupancy factor is level-independent, so nu enters the
model only through the overall factor C/(exp(-nu) - 1): (C, nu) are not
separately identifiable and only data whose point ratio already equals
the model's fixed shape ratio (e.g. curves generated by the model
itself) can be interpolated.  In that degenerate case nu is pinned to
the documented convention NU_BETA0 and C absorbs the scale; anything
else raises CalibrationError with the achievable ratio.  Calibrations
meant to determine (C, nu) from data should use beta > 0.
"""

import math
from dataclasses import dataclass, replace

from .bose_model import BoseParams, rank_model_neg1
from .corpus import RankCurve
from .errors import CalibrationError, ConvergenceError, DomainError, ValidationError

NU_BETA0 = -1.0

INTERP_TOL = 1e-9

_MODES = ("auto", "discrete", "quadrature", "closed-beta0")


@dataclass(frozen=True)
class FitConfig:
    """Calibration frequencies, scale constant, and model mode."""

    omega1: int
    omega2: int
    alpha: float
    beta: float = 0.0
    mode: str = "auto"

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValidationError(f"unknown mode {self.mode!r}")
        if not (self.omega1 < self.omega2):
            raise ValidationError("omega1 must be smaller than omega2")
        if not (self.alpha > 0):
            raise ValidationError("alpha must be positive")
        if not (self.alpha * self.omega1 > 2.0):
            raise ValidationError(
                f"alpha*omega1 must exceed 2, got {self.alpha * self.omega1}"
            )
        if self.beta < 0:
            raise ValidationError("beta must be >= 0")

    @property
    def resolved_mode(self) -> str:
        if self.mode != "auto":
            return self.mode
        return "closed-beta0" if self.beta == 0.0 else "quadrature"


@dataclass(frozen=True)
class FitResult:
    """Calibrated constants; sigma is attached by mean_quadratic_error."""

    C: float
    nu: float
    alpha: float
    beta: float
    mode: str
    omega1: int
    omega2: int
    sigma: float = None
    n_points: int = None

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "nu": self.nu,
            "C": self.C,
            "sigma": self.sigma,
            "omega1": self.omega1,
            "omega2": self.omega2,
            "n_points": self.n_points,
        }


def _model(omega, cfg: FitConfig, nu, C=1.0):
    return rank_model_neg1(
        omega, cfg.alpha, BoseParams(cfg.beta, nu), C, mode=cfg.resolved_mode
    )


def model_curve(omegas, alpha, beta, nu, C, mode="discrete") -> RankCurve:
    """RankCurve generated by the model itself (for synthetics and docs)."""
    params = BoseParams(beta, nu)
    ranks = [rank_model_neg1(w, alpha, params, C, mode=mode) for w in omegas]
    return RankCurve(tuple(int(w) for w in omegas), tuple(ranks))


def calibrate_two_point(curve: RankCurve, cfg: FitConfig) -> FitResult:
    """(C, nu) such that the model hits the curve at omega1 and omega2."""
    r1 = curve.rank_at(cfg.omega1)
    r2 = curve.rank_at(cfg.omega2)
    rho = r2 / r1

    if cfg.beta == 0.0:
        nu = NU_BETA0
        shape_ratio = _model(cfg.omega2, cfg, nu) / _model(cfg.omega1, cfg, nu)
        if abs(shape_ratio - rho) > 1e-9 * rho:
            raise CalibrationError(
                "beta = 0 collapses (C, nu) to one scale: the model point "
                f"ratio is fixed at {shape_ratio!r} but the data ratio is "
                f"{rho!r}; use beta > 0 or different calibration points",
                achievable=(shape_ratio, shape_ratio),
                requested=rho,
            )
    else:
        nu = _solve_ratio_for_nu(cfg, rho)

    c = r1 / _model(cfg.omega1, cfg, nu)
    fit = FitResult(
        C=c, nu=nu, alpha=cfg.alpha, beta=cfg.beta, mode=cfg.resolved_mode,
        omega1=cfg.omega1, omega2=cfg.omega2,
    )
    for omega, r_emp in ((cfg.omega1, r1), (cfg.omega2, r2)):
        resid = abs(_model(omega, cfg, nu, c) - r_emp) / r_emp
        if resid > INTERP_TOL:
            raise ConvergenceError(
                f"interpolation residual {resid:.3e} at omega={omega} "
                f"exceeds {INTERP_TOL}",
                residual=resid,
            )
    return fit


def _solve_ratio_for_nu(cfg: FitConfig, rho: float) -> float:
    """Root of model(omega2)/model(omega1) = rho in nu, beta > 0.

    The ratio tends to 1 at the condensate edge nu -> 2 beta and to a
    finite supremum as nu -> -inf, decreasing in between; the bracket
    expands downward until it straddles rho or the ratio stops moving.
    """
    nu_edge = 2.0 * cfg.beta

    def ratio(nu):
        return _model(cfg.omega2, cfg, nu) / _model(cfg.omega1, cfg, nu)

    if rho <= 1.0:
        raise CalibrationError(
            f"data ratio {rho!r} is not above 1; the model cannot reach it",
            achievable=(1.0, None),
            requested=rho,
        )

    step = max(1.0, abs(nu_edge))
    nu_hi = nu_edge - 1e-9 * step
    r_hi = ratio(nu_hi)
    nu_lo = nu_edge - step
    r_lo = ratio(nu_lo)
    for _ in range(80):
        if r_lo >= rho:
            break
        step *= 2.0
        nu_next = nu_edge - step
        r_next = ratio(nu_next)
        if abs(r_next - r_lo) <= 1e-13 * r_lo:
            raise CalibrationError(
                f"data ratio {rho!r} above the achievable range "
                f"({r_hi!r}, {r_next!r}) for alpha={cfg.alpha}, beta={cfg.beta}",
                achievable=(min(r_hi, 1.0), r_next),
                requested=rho,
            )
        nu_lo, r_lo = nu_next, r_next
    else:
        raise CalibrationError(
            "failed to bracket the ratio equation",
            achievable=(r_hi, r_lo),
            requested=rho,
        )

    from scipy.optimize import brentq

    return float(
        brentq(lambda nu: ratio(nu) - rho, nu_lo, nu_hi, xtol=1e-13, rtol=8.9e-16,
               maxiter=300)
    )


def mean_quadratic_error(curve: RankCurve, fit: FitResult,
                         cfg: FitConfig = None) -> FitResult:
    """Attach sigma: RMS distance over surviving in-domain curve points.

    Points with alpha*omega <= 2 lie below the model's first level and
    are excluded; n_points records how many entered the average.
    """
    if cfg is None:
        cfg = FitConfig(omega1=fit.omega1, omega2=fit.omega2, alpha=fit.alpha,
                        beta=fit.beta, mode=fit.mode)
    sq_sum = 0.0
    used = 0
    for omega, r_emp in curve.points():
        if cfg.alpha * omega <= 2.0:
            continue
        sq_sum += (r_emp - _model(omega, cfg, fit.nu, fit.C)) ** 2
        used += 1
    if used == 0:
        raise DomainError("no curve points inside the model domain")
    sigma = math.sqrt(sq_sum / used)
    return replace(fit, sigma=sigma, n_points=used)


@dataclass(frozen=True)
class SweepResult:
    """(alpha, sigma) grid with skip notes and the argmin alpha."""

    entries: tuple  # (alpha, sigma-or-None, note-or-None)
    best_alpha: float

    @property
    def evaluated(self):
        return [(a, s) for a, s, _ in self.entries if s is not None]

    def to_csv(self) -> str:
        lines = ["alpha,sigma"]
        for alpha, sigma, _ in self.entries:
            lines.append(f"{alpha!r},{'nan' if sigma is None else repr(sigma)}")
        return "\n".join(lines) + "\n"


def sweep_grid(alpha_lo: float, alpha_hi: float, step: float):
    """alpha_lo + k*step for k = 0.. while inside [alpha_lo, alpha_hi]."""
    if not (alpha_lo > 0 and alpha_hi >= alpha_lo and step > 0):
        raise DomainError("invalid sweep range")
    grid = []
    k = 0
    while True:
        alpha = alpha_lo + k * step
        if alpha > alpha_hi + 1e-9:
            break
        grid.append(alpha)
        k += 1
    return grid


def alpha_sweep(curve: RankCurve, alpha_lo: float, alpha_hi: float,
                step: float, cfg_template: FitConfig) -> SweepResult:
    """Calibrate and score sigma at every grid alpha; argmin wins.

    Grid points whose configuration is infeasible (alpha*omega1 <= 2) or
    whose calibration has no root are recorded with a note instead of a
    sigma.  Points are independent, so evaluation order cannot change
    the result; ties break toward smaller alpha.
    """
    entries = []
    best_alpha, best_sigma = None, None
    for alpha in sweep_grid(alpha_lo, alpha_hi, step):
        if alpha * cfg_template.omega1 <= 2.0:
            entries.append((alpha, None, "alpha*omega1 <= 2"))
            continue
        cfg = replace(cfg_template, alpha=alpha)
        try:
            fit = calibrate_two_point(curve, cfg)
            fit = mean_quadratic_error(curve, fit, cfg)
        except (CalibrationError, ConvergenceError, DomainError) as exc:
            entries.append((alpha, None, str(exc)))
            continue
        entries.append((alpha, fit.sigma, None))
        if best_sigma is None or fit.sigma < best_sigma:
            best_alpha, best_sigma = alpha, fit.sigma
    if best_alpha is None:
        raise CalibrationError("every grid alpha was infeasible")
    return SweepResult(entries=tuple(entries), best_alpha=best_alpha)
