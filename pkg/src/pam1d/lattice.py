"""Finite-box lattice solver: Dirichlet eigenpairs and the exact box solution.

The operator is kappa*Laplacian + xi on Q_R = [z-R, z+R] with zero boundary,
a symmetric tridiagonal matrix with diagonal xi - 2 kappa and off-diagonal
kappa.  Heavy potential sites screen parts of the box so strongly that
eigenvector tails and point values of the solution drop far below the double
floating-point range; every quantity that can underflow is therefore carried
in log space, with tails reconstructed by the three-term recurrence shot from
the Dirichlet boundary toward the localization peak (the numerically stable
direction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potential import Field, PotentialSpec, sample_field

__all__ = [
    "TridiagonalOperator",
    "SpectralData",
    "PointSolution",
    "SolveResult",
    "hamiltonian",
    "principal_eigpair",
    "full_spectrum",
    "solve_box",
    "solve_point_log",
    "solve_adaptive",
    "truncation_product",
]

DENSE_LIMIT = 20000
SOLVE_CLAMP = 1e8
_RELIABLE = 1e-6  # dense eigenvector entries below this are treated as noise


@dataclass(frozen=True)
class TridiagonalOperator:
    """kappa*Laplacian + xi on z + Q_R with Dirichlet boundary.

    ``diag`` carries the representation diagonal, with heavy sites at the
    field-level clamp.  Spectral computations use ``solve_diag``, where the
    clamp is tightened to -SOLVE_CLAMP: the tightening moves any eigenvalue
    by less than kappa^2 / SOLVE_CLAMP, far below the roundoff (machine
    epsilon times the matrix norm) that diagonalizing the looser clamp would
    force on every eigenvalue.
    """

    z: int
    R: int
    kappa: float
    diag: np.ndarray        # xi(z+x) - 2 kappa, heavy sites at -XI_CLAMP
    solve_diag: np.ndarray  # same with the clamp tightened to -SOLVE_CLAMP
    clamped: np.ndarray     # mask of sites entered as -XI_CLAMP

    @property
    def n(self) -> int:
        return 2 * self.R + 1

    def offdiag(self) -> np.ndarray:
        return np.full(self.n - 1, self.kappa)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.solve_diag * v
        out[:-1] += self.kappa * v[1:]
        out[1:] += self.kappa * v[:-1]
        return out


@dataclass(frozen=True)
class SpectralData:
    """Eigen-data of a box operator; ``principal`` is the largest eigenvalue."""

    eigenvalues: np.ndarray
    principal: float
    eigvec: np.ndarray
    residual: float
    vectors: np.ndarray | None = None


def hamiltonian(field: Field, z: int, R: int, kappa: float) -> TridiagonalOperator:
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    if R < 0:
        raise ValueError(f"R must be >= 0, got {R}")
    xi, clamped = field.xi_clamped(z - R, z + R)
    return TridiagonalOperator(z=z, R=R, kappa=kappa, diag=xi - 2.0 * kappa,
                               solve_diag=np.maximum(xi, -SOLVE_CLAMP) - 2.0 * kappa,
                               clamped=clamped)


# ---------------------------------------------------------------------------
# Stable tail reconstruction


def _shoot_log_multi(diag: np.ndarray, kappa: float, lams: np.ndarray,
                     from_left: bool) -> tuple[np.ndarray, np.ndarray]:
    """Log-magnitude and sign of the recurrence solution with one Dirichlet end.

    Solves kappa v[i+1] = (lam + 2 kappa - xi[i]) v[i] - kappa v[i-1] for all
    shifts ``lams`` at once, starting from v = (0, 1) at the boundary.
    Shooting from the boundary toward the interior follows the growing
    solution, so the decaying eigenvector tail is obtained with relative
    accuracy.  Returns arrays of shape (n, m).
    """
    n, m = len(diag), len(lams)
    d = diag[::1] if from_left else diag[::-1]
    logabs = np.empty((n, m))
    signs = np.empty((n, m))
    prev = np.zeros(m)
    cur = np.ones(m)
    scale = np.zeros(m)
    for i in range(n):
        logabs[i] = scale + np.log(np.maximum(np.abs(cur), 1e-320))
        signs[i] = np.where(cur >= 0.0, 1.0, -1.0)
        nxt = ((lams - d[i]) / kappa) * cur - prev
        prev, cur = cur, nxt
        mag = np.maximum(np.abs(cur), np.abs(prev))
        big = mag > 1e100
        if big.any():
            f = np.where(big, mag, 1.0)
            cur = cur / f
            prev = prev / f
            scale = scale + np.where(big, np.log(f), 0.0)
    if not from_left:
        logabs = logabs[::-1]
        signs = signs[::-1]
    return logabs, signs


def _log_entry(vecs: np.ndarray, lams: np.ndarray, diag: np.ndarray, kappa: float,
               x_idx: int) -> tuple[np.ndarray, np.ndarray, dict]:
    """log|v_j(x)| and sign for each column, shooting where the entry is noise.

    Returns (logabs, sign, passes) where passes caches the two shooting passes
    for reuse.
    """
    n, m = vecs.shape
    anchors = np.argmax(np.abs(vecs), axis=0)
    logv = np.full(m, np.nan)
    sgn = np.ones(m)
    direct = np.abs(vecs[x_idx, :]) >= _RELIABLE
    logv[direct] = np.log(np.abs(vecs[x_idx, direct]))
    sgn[direct] = np.sign(vecs[x_idx, direct])
    passes: dict = {}
    need = ~direct
    if need.any():
        left_pass = right_pass = None
        for j in np.nonzero(need)[0]:
            a = anchors[j]
            anchor_log = math.log(abs(vecs[a, j]))
            anchor_sign = 1.0 if vecs[a, j] >= 0 else -1.0
            if x_idx == a:
                logv[j], sgn[j] = anchor_log, anchor_sign
                continue
            if x_idx < a:
                if left_pass is None:
                    left_pass = _shoot_log_multi(diag, kappa, lams[need], True)
                    passes["left"] = (left_pass, np.nonzero(need)[0])
                la, ls = left_pass
                col = int(np.searchsorted(np.nonzero(need)[0], j))
                logv[j] = la[x_idx, col] - la[a, col] + anchor_log
                sgn[j] = ls[x_idx, col] * ls[a, col] * anchor_sign
            else:
                if right_pass is None:
                    right_pass = _shoot_log_multi(diag, kappa, lams[need], False)
                    passes["right"] = (right_pass, np.nonzero(need)[0])
                ra, rs = right_pass
                col = int(np.searchsorted(np.nonzero(need)[0], j))
                logv[j] = ra[x_idx, col] - ra[a, col] + anchor_log
                sgn[j] = rs[x_idx, col] * rs[a, col] * anchor_sign
    return logv, sgn, passes


# ---------------------------------------------------------------------------
# Eigenpairs


def _top_eigenpairs(op: TridiagonalOperator, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k largest eigenpairs via Sturm-sequence bisection + inverse iteration."""
    n = op.n
    k = min(k, n)
    w, v = eigh_tridiagonal(op.solve_diag, op.offdiag(), select="i",
                            select_range=(n - k, n - 1), lapack_driver="stebz")
    return w, v


def _hybrid_principal(op: TridiagonalOperator, lam: float, v: np.ndarray) -> np.ndarray:
    """Replace noise-level tail entries of the principal vector by shot tails."""
    v = v.copy()
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    a = int(np.argmax(v))
    small = v < _RELIABLE * v[a]
    if small.any():
        lams = np.array([lam])
        logs_l, signs_l = _shoot_log_multi(op.solve_diag, op.kappa, lams, True)
        logs_r, signs_r = _shoot_log_multi(op.solve_diag, op.kappa, lams, False)
        anchor_log = math.log(v[a])
        for i in np.nonzero(small)[0]:
            if i < a:
                lv = logs_l[i, 0] - logs_l[a, 0] + anchor_log
            elif i > a:
                lv = logs_r[i, 0] - logs_r[a, 0] + anchor_log
            else:
                continue
            v[i] = math.exp(max(lv, -744.0))
    v = np.maximum(v, 1e-320)
    return v / math.sqrt(float(v @ v))


def principal_eigpair(op: TridiagonalOperator) -> SpectralData:
    """Principal Dirichlet eigenpair; eigenvector strictly positive."""
    w, v = _top_eigenpairs(op, 1)
    lam = float(w[-1])
    vec = _hybrid_principal(op, lam, v[:, -1])
    hv = op.matvec(vec)
    lam = float(vec @ hv)  # Rayleigh refinement: the clamped rows carry
    # negligible weight, so the quotient is accurate to relative precision
    res = float(np.linalg.norm(hv - lam * vec))
    return SpectralData(eigenvalues=np.array([lam]), principal=lam, eigvec=vec,
                        residual=res)


def full_spectrum(op: TridiagonalOperator) -> SpectralData:
    """Complete orthonormal eigendecomposition (dense path)."""
    if op.n > DENSE_LIMIT:
        raise ValueError(f"box dimension {op.n} exceeds dense limit {DENSE_LIMIT}")
    w, v = eigh_tridiagonal(op.solve_diag, op.offdiag())
    vec = _hybrid_principal(op, float(w[-1]), v[:, -1])
    hv = op.matvec(vec)
    lam = float(vec @ hv)
    res = float(np.linalg.norm(hv - lam * vec))
    return SpectralData(eigenvalues=w, principal=lam, eigvec=vec,
                        residual=res, vectors=v)


# ---------------------------------------------------------------------------
# Box solutions


def solve_box(field: Field, z: int, R: int, kappa: float, t: float) -> np.ndarray:
    """u_R(t, .) on z + Q_R by spectral expansion; entries clipped at 0."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    op = hamiltonian(field, z, R, kappa)
    spec = full_spectrum(op)
    w, v = spec.eigenvalues, spec.vectors
    with np.errstate(under="ignore"):
        coef = np.exp(t * w) * (v.T @ np.ones(op.n))
    u = v @ coef
    return np.maximum(u, 0.0)


@dataclass(frozen=True)
class PointSolution:
    """log u_R(t, x) at a single site, with the principal-mode data needed to
    state the eigenvalue sandwich at the same point."""

    log_u: float
    principal: float
    log_e_center: float
    n: int
    modes_used: int
    sign_ok: bool


def solve_point_log(field: Field, z: int, R: int, kappa: float, t: float,
                    x: int | None = None) -> PointSolution:
    """log u_R(t, x) via a pruned spectral mode sum, stable far below underflow.

    Mode j contributes exp(t lam_j) v_j(x) <v_j, 1>; contributions are summed
    in log space, with |v_j(x)| reconstructed by boundary shooting when the
    dense eigenvector entry is at noise level.  Modes are taken from the top
    of the spectrum until the a-priori bound t*lam + 0.5 log n falls 46 nats
    below the running total.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if x is None:
        x = z
    op = hamiltonian(field, z, R, kappa)
    n = op.n
    x_idx = x - (z - R)
    if not 0 <= x_idx < n:
        raise ValueError(f"evaluation point {x} outside box [{z - R}, {z + R}]")
    ones = np.ones(n)
    log_terms: list[float] = []
    signs: list[float] = []
    log_e_center = None
    principal = None
    k_done = 0
    batch = 16
    best = -math.inf
    while k_done < n:
        k_new = min(n, k_done + batch)
        w, v = eigh_tridiagonal(op.solve_diag, op.offdiag(), select="i",
                                select_range=(n - k_new, n - 1 - k_done),
                                lapack_driver="stebz")
        # returned ascending; walk from the top down
        order = np.argsort(w)[::-1]
        w, v = w[order], v[:, order]
        logv, sgn, _ = _log_entry(v, w, op.solve_diag, op.kappa, x_idx)
        ip = v.T @ ones
        for j in range(len(w)):
            lam = float(w[j])
            if principal is None:
                principal = lam
                vx = v[:, j]
                a = int(np.argmax(np.abs(vx)))
                flip = -1.0 if vx[a] < 0 else 1.0
                log_e_center = float(logv[j])
                # orientation: principal vector taken positive
                sgn[j] *= flip
                ip[j] *= flip
            term_sign = sgn[j] * (1.0 if ip[j] >= 0 else -1.0)
            mag = abs(ip[j])
            lt = t * lam + logv[j] + (math.log(mag) if mag > 0 else -math.inf)
            if lt > -math.inf:
                log_terms.append(lt)
                signs.append(term_sign)
                if term_sign > 0:
                    best = max(best, lt)
        k_done = k_new
        batch = min(2 * batch, 512)
        if k_done < n:
            lam_next_bound = float(w[-1])  # next eigenvalues are no larger
            if t * lam_next_bound + 0.5 * math.log(n) < best - 46.0:
                break
    arr = np.array(log_terms)
    sg = np.array(signs)
    m = arr.max()
    total = float(np.sum(sg * np.exp(arr - m)))
    sign_ok = total > 0.0
    if not sign_ok:
        # cancellation at noise level; fall back to the positive part, which
        # still dominates the true value up to roundoff
        total = float(np.sum(np.exp(arr[sg > 0] - m)))
    log_u = m + math.log(total)
    return PointSolution(log_u=log_u, principal=principal,
                         log_e_center=log_e_center, n=n,
                         modes_used=k_done, sign_ok=sign_ok)


@dataclass(frozen=True)
class SolveResult:
    log_u: float
    u: float
    R: int
    principal: float
    clamped_sites: int
    converged: bool


def solve_adaptive(spec: PotentialSpec, seed: int, t: float, rtol: float,
                   kappa: float = 1.0, r_start: int = 8,
                   r_cap: int = 1 << 14) -> SolveResult:
    """Monotone exhaustion in R; the returned value is a lower bound of u(t,0).

    Doubles R until the relative change of u_R(t,0) stays below rtol twice in
    a row.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    prev = None
    stable = 0
    R = r_start
    while True:
        fld = sample_field(spec, -R, R, seed)
        sol = solve_point_log(fld, 0, R, kappa, t)
        if prev is not None:
            rel = abs(math.expm1(min(prev - sol.log_u, 0.0)))
            stable = stable + 1 if rel < rtol else 0
            if stable >= 2:
                clamped = int(hamiltonian(fld, 0, R, kappa).clamped.sum())
                return SolveResult(log_u=sol.log_u,
                                   u=math.exp(sol.log_u) if sol.log_u > -744 else 0.0,
                                   R=R, principal=sol.principal,
                                   clamped_sites=clamped, converged=True)
        prev = sol.log_u
        if 2 * R > r_cap:
            clamped = int(hamiltonian(fld, 0, R, kappa).clamped.sum())
            return SolveResult(log_u=sol.log_u,
                               u=math.exp(sol.log_u) if sol.log_u > -744 else 0.0,
                               R=R, principal=sol.principal,
                               clamped_sites=clamped, converged=False)
        R *= 2


def truncation_product(field: Field, b: float, R: int) -> tuple[float, float]:
    """Log of the two screening products prod b/(-xi(x) v b) over [0,R], [-R,0].

    Computed exactly in the W-representation (no clamping, no overflow);
    both values are <= 0.
    """
    if b <= 0:
        raise ValueError(f"b must be > 0, got {b}")
    log_b = math.log(b)
    wp = field.log_neg_or1(0, R)
    right = float(np.sum(log_b - np.maximum(wp, log_b)))
    wm = field.log_neg_or1(-R, 0)
    left = float(np.sum(log_b - np.maximum(wm, log_b)))
    return left, right
