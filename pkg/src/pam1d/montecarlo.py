"""Feynman-Kac Monte Carlo and the explicit screening lower bound.

The Feynman-Kac representation writes u(t, z) as an expectation over a
continuous-time simple random walk with jump rate 2 kappa started at z:

    u(t, z) = E_z[ exp( integral_0^t xi(X_s) ds ) ].

With non-positive potentials, restricting to paths that stay inside a box up
to time t (killing on exit) can only discard non-negative mass, so the boxed
estimator is a certified lower bound in expectation.

The screening bound follows a deterministic strategy: walk quickly to a
favourable window, spending time r_x = (-xi(x) v 1)^{-1} at each crossed
site, then sit in the window for the remaining time.  Every factor is a
probability or an exact exponential functional, so the product is a rigorous
pathwise lower bound for u(t, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import hamiltonian, principal_eigpair
from .potential import Field

__all__ = [
    "WalkPath",
    "simulate_walk",
    "fk_estimate",
    "FkResult",
    "screening_lower_bound",
    "best_screening_bound",
]


@dataclass(frozen=True)
class WalkPath:
    """A continuous-time simple random walk trajectory on the integers.

    ``times[i]`` is the jump instant into ``sites[i+1]``; the walk occupies
    ``sites[0]`` on [0, times[0]).
    """

    sites: np.ndarray
    times: np.ndarray
    t: float
    kappa: float

    def position(self, s: float) -> int:
        if not 0 <= s <= self.t:
            raise ValueError(f"s = {s} outside [0, {self.t}]")
        return int(self.sites[np.searchsorted(self.times, s, side="right")])


def simulate_walk(kappa: float, t: float, seed: int, z: int = 0) -> WalkPath:
    """One rate-2*kappa nearest-neighbour walk on [0, t] started at z."""
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    rng = np.random.default_rng(seed)
    rate = 2.0 * kappa
    jumps = [0.0]
    while True:
        nxt = jumps[-1] + rng.exponential(1.0 / rate)
        if nxt > t:
            break
        jumps.append(nxt)
    n_jumps = len(jumps) - 1
    steps = rng.choice((-1, 1), size=n_jumps)
    sites = z + np.concatenate(([0], np.cumsum(steps)))
    return WalkPath(sites=sites, times=np.array(jumps[1:]), t=t, kappa=kappa)


@dataclass(frozen=True)
class FkResult:
    estimate: float
    stderr: float
    n_samples: int
    exit_fraction: float
    lower_bound: bool


def _occupation_batch(kappa: float, t: float, max_jumps: int,
                      rng: np.random.Generator, batch: int
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized batch of walks: displacements, holding times, jump counts.

    Returns (steps, holds, counts): steps[b, j] in {-1, +1}, holds[b, j] the
    time spent at the j-th visited site (0 beyond the walk's jump count), and
    counts[b] the number of jumps before t.
    """
    rate = 2.0 * kappa
    holds = rng.exponential(1.0 / rate, size=(batch, max_jumps + 1))
    cum = np.cumsum(holds, axis=1)
    counts = np.sum(cum < t, axis=1)
    if np.any(counts > max_jumps):
        raise ArithmeticError("max_jumps exceeded; raise the jump budget")
    # truncate the final holding interval at t
    prev = np.concatenate([np.zeros((batch, 1)), cum[:, :-1]], axis=1)
    holds = np.minimum(cum, t) - np.minimum(prev, t)
    steps = rng.choice((-1, 1), size=(batch, max_jumps))
    return steps, holds, counts


def fk_estimate(field: Field, kappa: float, t: float, n_samples: int,
                seed: int, box: int | None = None, z: int = 0,
                batch: int = 4096) -> FkResult:
    """Feynman-Kac estimate of u(t, z) by direct path simulation.

    With ``box`` set, paths leaving z + [-box, box] are killed (contribute 0),
    making the estimate an unbiased lower bound of the full-space value.
    Without a box the field must cover the range actually visited, else a
    ValueError is raised.
    """
    if n_samples <= 0:
        raise ValueError(f"n_samples must be > 0, got {n_samples}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    rate = 2.0 * kappa
    # generous Poisson tail budget for the jump count
    max_jumps = int(rate * t + 12.0 * math.sqrt(rate * t + 1.0) + 30)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    exited = 0
    done = 0
    while done < n_samples:
        b = min(batch, n_samples - done)
        steps, holds, counts = _occupation_batch(kappa, t, max_jumps, rng, b)
        pos = z + np.concatenate([np.zeros((b, 1), dtype=np.int64),
                                  np.cumsum(steps, axis=1)], axis=1)
        live = np.arange(max_jumps + 1) <= counts[:, None]
        vis = pos[live]
        if box is not None:
            inside = np.abs(pos - z) <= box
            alive = np.cumprod(inside | ~live, axis=1).astype(bool)
            killed = ~alive[np.arange(b), counts]
            exited += int(killed.sum())
            live = live & alive
            vis = pos[live]
        if vis.size and (vis.min() < field.lo or vis.max() > field.hi):
            raise ValueError(
                f"walk visited [{vis.min()}, {vis.max()}] outside the sampled "
                f"field [{field.lo}, {field.hi}]")
        idx = np.clip(pos - field.lo, 0, field.hi - field.lo)
        heavy = field.heavy[idx]
        vals = field.values[idx]
        with np.errstate(over="ignore"):
            xi = np.where(heavy, -np.exp(np.minimum(vals, 700.0)), vals)
        log_w = np.sum(np.where(live, xi * holds, 0.0), axis=1)
        if box is not None:
            log_w = np.where(killed, -np.inf, log_w)
        with np.errstate(under="ignore"):
            w = np.exp(log_w)
        total += float(w.sum())
        total_sq += float((w * w).sum())
        done += b
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return FkResult(estimate=mean,
                    stderr=math.sqrt(var / n_samples),
                    n_samples=n_samples,
                    exit_fraction=exited / n_samples,
                    lower_bound=box is not None)


def screening_lower_bound(field: Field, kappa: float, t: float, y: int, R: int,
                          s: float | None = None) -> float:
    """Log of an explicit lower bound for u(t, 0) via the travel strategy.

    The walk crosses from 0 to the centre y of the window y + [-R, R],
    spending r_x = (-xi(x) v 1)^{-1} at each site x strictly between 0 and y
    (probability of moving on within time r_x is at least
    (1 - e^{-2 kappa r_x})/2, and the potential costs at most e^{xi(x) r_x});
    it then stays inside the window for the remaining time, bounded below by
    the diagonal heat-kernel estimate e(y)^2 e^{(t-s) lambda} through the
    principal Dirichlet eigenpair of the window.

    After arriving (in total time at most sum r_x), the walk waits at the
    window centre until the split time s, paying the penalty (xi(y) - 2 kappa)
    per unit of waiting time, and then stays in the window over [s, t].  The
    split defaults to s = min(sum r_x, t/2); raises ValueError when the
    crossing budget sum r_x exceeds s (strategy infeasible at this split).
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    if s is not None and not 0.0 <= s <= t:
        raise ValueError(f"s must be in [0, t], got {s}")
    if y == 0:
        budget = 0.0
        log_travel = 0.0
    else:
        # the walk must reach the window centre itself (the kernel bound
        # below is taken at the centre), so every site from 0 up to y is
        # crossed and paid for
        if y > 0:
            lo_x, hi_x = 0, y - 1
        else:
            lo_x, hi_x = y + 1, 0
        wp = field.log_neg_or1(lo_x, hi_x)       # log(-xi v 1) per crossed site
        with np.errstate(under="ignore"):
            r = np.exp(-wp)                       # r_x = (-xi v 1)^{-1} <= 1
        budget = float(r.sum())
        # per-site: log[ (1 - e^{-2 kappa r}) / 2 ] + xi * r; the potential
        # cost xi * r is exactly -1 wherever -xi >= 1 and xi otherwise
        # r underflows to 0 on astronomically deep sites; the factor is then
        # -inf, correctly marking the crossing as impossible
        with np.errstate(divide="ignore"):
            jump = np.log(-np.expm1(-2.0 * kappa * r)) - math.log(2.0)
        heavy, vals = field.slice(lo_x, hi_x)
        pot = np.where(heavy | (vals <= -1.0), -1.0, vals)
        log_travel = float(jump.sum() + pot.sum())
    if s is None:
        s = min(budget, t / 2.0)
    if budget > s:
        raise ValueError(
            f"crossing budget sum r_x = {budget:.6g} exceeds the split "
            f"time s = {s:.6g}; strategy infeasible")
    # waiting penalty at the centre until time s, with the exact potential
    c_heavy, c_val = (a.item() for a in field.slice(y, y))
    if c_heavy:
        xi_c = -math.exp(min(c_val, 700.0))
    else:
        xi_c = c_val
    log_wait = (xi_c - 2.0 * kappa) * s
    op = hamiltonian(field, y, R, kappa)
    pe = principal_eigpair(op)
    e_c = pe.eigvec[R]                            # window centre entry
    log_window = 2.0 * math.log(max(e_c, 1e-320)) + (t - s) * pe.principal
    return log_travel + log_wait + log_window


def best_screening_bound(field: Field, kappa: float, t: float, search: int,
                         R: int) -> tuple[float, int]:
    """Best screening bound over candidate window centres; (log bound, y*).

    Scans candidate centres y of both signs with |y| <= search on a stride of
    R (every site when R <= 1), skipping centres whose crossing is infeasible
    within the split time; raises ValueError when no candidate is feasible.
    """
    if search < 0:
        raise ValueError(f"search radius must be >= 0, got {search}")
    step = max(R, 1)
    pos = np.arange(0, search + 1, step)
    centres = np.unique(np.concatenate([pos, -pos]))
    centres = centres[(centres - R >= field.lo) & (centres + R <= field.hi)]
    if centres.size == 0:
        raise ValueError("field too small for the window radius")
    best = -math.inf
    best_y = None
    for y in centres:
        try:
            val = screening_lower_bound(field, kappa, t, int(y), R)
        except ValueError:
            continue
        if val > best:
            best, best_y = val, int(y)
    if best_y is None:
        raise ValueError("no feasible screening candidate in the search range")
    return best, best_y
