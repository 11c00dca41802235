"""Statistical experiments connecting the lattice model to its asymptotics.

Each routine checks one ingredient of the almost-sure decay picture on
finite-t data: the rescaled cumulant collapse, the divergence of the
screening-product sums, their converse upper bound under the regularized
tail scale, the appearance of favourable microboxes in the macrobox, and the
decay-rate curve rho(t) = alpha(b_t)^2 / t * log u(t, 0) itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import solve_adaptive
from .potential import (PotentialSpec, cumulant_H, g_tilde, g_tilde_inverse,
                        sample_field)
from .scales import ScaleParams, alpha, b_scale, gamma_box, invert_G

__all__ = [
    "ExperimentConfig",
    "RateCurve",
    "t_grid",
    "rate_curve",
    "check_assumption_H",
    "check_lln",
    "check_last",
    "check_microbox",
    "estimate_rho",
]


@dataclass(frozen=True)
class ExperimentConfig:
    spec: PotentialSpec
    kappa: float = 1.0
    eta: float = 0.8
    seeds: tuple = tuple(range(20))
    rtol: float = 1e-4

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must be in (0,1), got {self.eta}")


def t_grid(spec: PotentialSpec, n_lo: int, n_hi: int) -> np.ndarray:
    """Times t with 1/G(t) = e^n for integer n in [n_lo, n_hi]."""
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError(f"need 1 <= n_lo <= n_hi, got {n_lo}, {n_hi}")
    return np.array([invert_G(spec, math.exp(-n)) for n in range(n_lo, n_hi + 1)])


@dataclass(frozen=True)
class RateCurve:
    """One row per (t, seed): the rate rho = alpha(b_t)^2 / t * log u(t, 0)."""

    t: np.ndarray
    seed: np.ndarray
    R_used: np.ndarray
    log_u: np.ndarray
    b_t: np.ndarray
    alpha_bt_sq: np.ndarray
    rho: np.ndarray
    converged: np.ndarray

    def median_rho(self) -> tuple[np.ndarray, np.ndarray]:
        """(unique times, seed-median of rho at each time)."""
        ts = np.unique(self.t)
        med = np.array([np.median(self.rho[self.t == t]) for t in ts])
        return ts, med


def rate_curve(cfg: ExperimentConfig, t_values: np.ndarray,
               r_cap: int = 1 << 14) -> RateCurve:
    """Decay-rate curve rho(t) = alpha(b_t)^2 / t * log u(t, 0) per seed.

    Rows where the solver hit its box cap are flagged via ``converged`` but
    kept in the table.
    """
    spec = cfg.spec
    params = ScaleParams.from_spec(spec)
    t_values = np.asarray(t_values, float)
    rows: list[tuple] = []
    for t in t_values:
        b = b_scale(spec, params, t)
        a2 = alpha(params, b) ** 2
        for seed in cfg.seeds:
            res = solve_adaptive(spec, seed, t, cfg.rtol, kappa=cfg.kappa,
                                 r_cap=r_cap)
            rows.append((t, seed, res.R, res.log_u, b, a2,
                         a2 / t * res.log_u, res.converged))
    cols = list(zip(*rows))
    return RateCurve(t=np.array(cols[0]), seed=np.array(cols[1]),
                     R_used=np.array(cols[2]), log_u=np.array(cols[3]),
                     b_t=np.array(cols[4]), alpha_bt_sq=np.array(cols[5]),
                     rho=np.array(cols[6]), converged=np.array(cols[7], bool))


def check_assumption_H(spec: PotentialSpec, t_values, y_grid=None,
                       A: float | None = None) -> dict:
    """Collapse of the rescaled cumulant onto the limit power law.

    Computes d(t) = max_y |alpha_t^3 / t * H(t y / alpha_t) + A y^gamma| on
    a y-grid; the deviations should decrease along increasing t.
    """
    from .potential import canonical_A
    if y_grid is None:
        y_grid = np.linspace(0.2, 3.0, 15)
    y_grid = np.asarray(y_grid, float)
    if A is None:
        A = canonical_A(spec)
    devs = []
    curves = []
    for t in t_values:
        a = t ** spec.nu
        vals = np.array([a ** 3 / t * cumulant_H(spec, t * y / a) for y in y_grid])
        target = -A * y_grid ** spec.gamma
        curves.append(vals)
        devs.append(float(np.max(np.abs(vals - target))))
    return {"t": np.asarray(t_values, float), "y": y_grid,
            "curves": np.array(curves), "deviation": np.array(devs), "A": A}


def check_lln(spec: PotentialSpec, b: float, n_values, seeds) -> dict:
    """Normalized screening-product sums, per seed and per n.

    T_n = sum_{x=1}^{floor(2 n log n)} log((-xi(x) v b)/b) / G^{-1}(1/n);
    the sums outgrow the normalizer, so for n large the statistic is well
    above 1.  Returns {"n", "stats" (seeds x n), "frac_gt_1", "frac_gt_10"}.
    Requires an infinite log-moment lower tail (the divergence hypothesis).
    """
    if b < 1.0:
        raise ValueError(f"b must be >= 1, got {b}")
    if not spec.lower.has_infinite_log_moment():
        raise ValueError(
            "lower tail has a finite log-moment; the divergence statement "
            "does not apply to this spec")
    n_values = [int(n) for n in np.atleast_1d(n_values)]
    if min(n_values) < 3:
        raise ValueError(f"n values must be >= 3, got {n_values}")
    seeds = list(seeds)
    log_b = math.log(b)
    stats = np.empty((len(seeds), len(n_values)))
    for j, n in enumerate(n_values):
        N = int(2 * n * math.log(n))
        norm = invert_G(spec, 1.0 / n)
        for i, seed in enumerate(seeds):
            fld = sample_field(spec, 1, N, seed)
            wp = fld.log_neg_or1(1, N)       # log(-xi v 1)
            terms = np.maximum(wp, log_b) - log_b
            stats[i, j] = float(terms.sum()) / norm
    return {"n": np.array(n_values), "stats": stats,
            "frac_gt_1": (stats > 1.0).mean(axis=0),
            "frac_gt_10": (stats > 10.0).mean(axis=0)}


def _g_hat_eta(spec: PotentialSpec, eta: float, x: np.ndarray, x0: float,
               theta_prime: float = 0.5) -> np.ndarray:
    """Concavified tail scale: 1/G^ is linear below x0 and shifted 1/G~ above.

    The linear piece has the right derivative of 1/G~ at x0, making 1/G^
    positive, increasing and concave on all of (0, infinity).
    """
    x = np.asarray(x, float)
    dx = 1e-6 * x0
    d0 = (1.0 / g_tilde(spec, eta, x0 + dx, theta_prime)
          - 1.0 / g_tilde(spec, eta, x0, theta_prime)) / dx
    inv = np.where(x <= x0, d0 * np.maximum(x, 1e-300), 0.0)
    big = x > x0
    if np.any(big):
        vals = np.array([1.0 / g_tilde(spec, eta, xi, theta_prime)
                         for xi in np.atleast_1d(x[big])])
        inv = inv.copy()
        inv[big] = vals + d0 * x0 - 1.0 / g_tilde(spec, eta, x0, theta_prime)
    return 1.0 / inv


def estimate_rho(spec: PotentialSpec, eta: float, x0: float = 1.0,
                 n_samples: int = 200_000, seed: int = 0,
                 theta_prime: float = 0.5) -> float:
    """Monte Carlo estimate of rho = 2 <1/G^_eta(Y_a)>, Y_a = log(-xi v a).

    The threshold a = e^{x0} matches the concavification point, so
    1/G^_eta(Y_a) vanishes only where the site is light enough.
    """
    fld = sample_field(spec, 1, n_samples, seed)
    wp = fld.log_neg_or1(1, n_samples)
    a_log = x0
    y = np.maximum(wp, a_log)
    vals = 1.0 / _g_hat_eta(spec, eta, y, x0, theta_prime)
    return 2.0 * float(vals.mean())


def check_last(spec: PotentialSpec, eta: float, n_values, seeds,
               rho: float | None = None, x0: float = 1.0,
               theta_prime: float = 0.5) -> tuple[dict, float]:
    """Converse normalized sums, per seed and per n, with the rho used.

    U_n = sum_{x=1}^n log(-xi(x) v 1) / G~_eta^{-1}(rho/n); the limsup is at
    most 1, so for n large the statistic concentrates below 1.  Returns
    ({"n", "stats", "frac_le_1p2"}, rho).  Requires an infinite log-moment
    lower tail, matching check_lln.
    """
    if not spec.lower.has_infinite_log_moment():
        raise ValueError(
            "lower tail has a finite log-moment; the upper-bound statement "
            "does not apply to this spec")
    if rho is None:
        rho = estimate_rho(spec, eta, x0=x0, theta_prime=theta_prime)
    n_values = [int(n) for n in np.atleast_1d(n_values)]
    seeds = list(seeds)
    stats = np.empty((len(seeds), len(n_values)))
    for j, n in enumerate(n_values):
        norm = g_tilde_inverse(spec, eta, rho / n, theta_prime)
        for i, seed in enumerate(seeds):
            fld = sample_field(spec, 1, n, seed)
            stats[i, j] = float(fld.log_neg_or1(1, n).sum()) / norm
    table = {"n": np.array(n_values), "stats": stats,
             "frac_le_1p2": (stats <= 1.2).mean(axis=0)}
    return table, rho


def check_microbox(spec: PotentialSpec, psi, eps: float, eta: float,
                   t_values, seeds, rho: float | None = None,
                   theta_prime: float = 0.5) -> np.ndarray:
    """Frequency of a favourable microbox in the macrobox, per time.

    For each t and seed, scans all centres y in the macrobox Q_{gamma_t} for
    a window on which the potential dominates the rescaled profile,
    xi(y+z) >= psi(z/alpha)/alpha^2 - eps/(2 alpha^2) for all |z| <= R*alpha
    (restricted to supp psi when gamma = 0), with alpha = alpha(b_t).
    Returns the success fraction over seeds for each t.

    Requires the profile budget L(psi) < 1 and eta in (L(psi), 1): a budget
    at or above 1 makes the sought windows too rare for the macrobox scale,
    and eta below the budget breaks the normalizer ordering.
    """
    from .potential import canonical_A
    from .variational import legendre_L

    budget = legendre_L(psi, canonical_A(spec), spec.gamma)
    if not budget < 1.0:
        raise ValueError(f"profile budget L(psi) = {budget:.6g} must be < 1")
    if not budget < eta < 1.0:
        raise ValueError(
            f"eta must be in (L(psi), 1) = ({budget:.6g}, 1), got {eta}")
    params = ScaleParams.from_spec(spec)
    if rho is None:
        rho = estimate_rho(spec, eta, theta_prime=theta_prime)
    freqs = []
    for t in t_values:
        b = b_scale(spec, params, t)
        a = alpha(params, b)
        g = gamma_box(spec, params, eta, rho, t, theta_prime)
        half = int(math.ceil(psi.R * a))
        z = np.arange(-half, half + 1)
        thr = psi(z / a) / a ** 2 - eps / (2.0 * a ** 2)
        if spec.gamma == 0.0:
            active = np.abs(psi(z / a)) > 0.0
        else:
            active = np.ones(len(z), bool)
        centre_lo, centre_hi = -int(math.ceil(g)), int(math.ceil(g))
        hits = 0
        for seed in seeds:
            fld = sample_field(spec, centre_lo - half, centre_hi + half, seed)
            heavy, vals = fld.slice(centre_lo - half, centre_hi + half)
            with np.errstate(over="ignore"):
                xi = np.where(heavy, -np.exp(np.minimum(vals, 700.0)), vals)
            ok = np.ones(centre_hi - centre_lo + 1, bool)
            for k in np.nonzero(active)[0]:
                seg = xi[k: k + centre_hi - centre_lo + 1]
                ok &= seg >= thr[k]
                if not ok.any():
                    break
            hits += bool(ok.any())
        freqs.append(hits / len(list(seeds)))
    return np.asarray(freqs)
