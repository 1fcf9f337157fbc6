"""Analytic first/second-moment functions on simplices: entropy, the
profile function, the overlap function, their tangent-space derivatives,
curvature checks, and the grid separation scan."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "entropy",
    "phi",
    "f_overlap",
    "f_grad_full",
    "f_hess_full",
    "tangent_gradient",
    "tangent_hessian",
    "GradientCheckReport",
    "f_gradient_check",
    "SeparationScanReport",
    "separation_scan",
    "d_cond_asymptotic",
    "first_moment_estimate",
]


def _as_simplex(p, dim: int | None = None, tol: float = 1e-9) -> np.ndarray:
    arr = np.asarray(p, dtype=np.float64).ravel()
    if dim is not None and arr.size != dim:
        raise ParameterError(f"expected a point in dimension {dim}, got {arr.size}")
    if arr.min() < -tol:
        raise ParameterError("simplex point has a negative entry")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise ParameterError(f"simplex point sums to {arr.sum()}, expected 1")
    return np.clip(arr, 0.0, None)


def entropy(p) -> float:
    """-sum p ln p with 0 ln 0 = 0."""
    arr = _as_simplex(p)
    nz = arr[arr > 0]
    return float(-(nz * np.log(nz)).sum())


def phi(alpha, d: float, k: int) -> float:
    """H(alpha) + (d/2) ln(1 - ||alpha||_2^2); the balanced value is
    ln k + (d/2) ln(1 - 1/k)."""
    arr = _as_simplex(alpha, k)
    s = 1.0 - float(arr @ arr)
    if s <= 0:
        raise DomainError("||alpha||^2 >= 1 (point mass): log argument non-positive")
    return entropy(arr) + 0.5 * d * math.log(s)


def f_overlap(rho, d: float, k: int) -> float:
    """H(rho) + (d/2) ln(1 - 2/k + ||rho||_2^2) over the k^2-simplex; the
    uniform value is 2 ln k + d ln(1 - 1/k)."""
    arr = _as_simplex(rho, k * k)
    s = 1.0 - 2.0 / k + float(arr @ arr)
    if s <= 0:
        raise DomainError("1 - 2/k + ||rho||^2 <= 0: log argument non-positive")
    return entropy(arr) + 0.5 * d * math.log(s)


def f_grad_full(rho: np.ndarray, d: float, k: int) -> np.ndarray:
    """Unconstrained partials of f_overlap: -1 - ln r_ij + d r_ij / S."""
    s = 1.0 - 2.0 / k + float(rho @ rho)
    return -1.0 - np.log(rho) + d * rho / s


def f_hess_full(rho: np.ndarray, d: float, k: int) -> np.ndarray:
    """Unconstrained Hessian: diagonal -1/r_ij + d/S - 2 d r_ij^2 / S^2,
    off-diagonal -2 d r_ij r_i'j' / S^2."""
    s = 1.0 - 2.0 / k + float(rho @ rho)
    h = -2.0 * d * np.outer(rho, rho) / s**2
    np.fill_diagonal(h, -1.0 / rho + d / s - 2.0 * d * rho**2 / s**2)
    return h


def tangent_gradient(grad: np.ndarray) -> np.ndarray:
    """Gradient under the substitution x_D = 1 - sum of the rest."""
    return grad[:-1] - grad[-1]


def tangent_hessian(hess: np.ndarray) -> np.ndarray:
    """Hessian under the same last-coordinate elimination."""
    a = hess[:-1, :-1]
    b = hess[:-1, -1][:, None]
    c = hess[-1, :-1][None, :]
    return a - b - c + hess[-1, -1]


def _fd_tangent_gradient(fun, x: np.ndarray, step: float) -> np.ndarray:
    """Central differences along the elimination coordinates (perturbing
    entry a and compensating on the last entry keeps the simplex sum)."""
    out = np.empty(x.size - 1)
    for a in range(x.size - 1):
        xp, xm = x.copy(), x.copy()
        xp[a] += step
        xp[-1] -= step
        xm[a] -= step
        xm[-1] += step
        out[a] = (fun(xp) - fun(xm)) / (2 * step)
    return out


def _fd_tangent_hessian(fun, x: np.ndarray, step: float) -> np.ndarray:
    """Richardson-extrapolated central second differences in tangent
    coordinates; O(step^4) truncation error."""

    def basic(h: float) -> np.ndarray:
        D = x.size - 1
        out = np.empty((D, D))
        f0 = fun(x)

        def shift(coords):
            y = x.copy()
            for a, t in coords:
                y[a] += t
                y[-1] -= t
            return fun(y)

        for a in range(D):
            out[a, a] = (shift([(a, h)]) - 2 * f0 + shift([(a, -h)])) / h**2
        for a in range(D):
            for b in range(a + 1, D):
                val = (
                    shift([(a, h), (b, h)])
                    - shift([(a, h), (b, -h)])
                    - shift([(a, -h), (b, h)])
                    + shift([(a, -h), (b, -h)])
                ) / (4 * h**2)
                out[a, b] = out[b, a] = val
        return out

    return (4.0 * basic(step / 2) - basic(step)) / 3.0


def _tangent_ball_point(k: int, radius: float, rng: np.random.Generator,
                        min_entry: float = 1e-9) -> np.ndarray:
    """Random point of the k^2-simplex within the given L2 radius of uniform."""
    base = np.full(k * k, 1.0 / k**2)
    while True:
        u = rng.standard_normal(k * k)
        u -= u.mean()
        u /= np.linalg.norm(u)
        r = radius * rng.random()
        x = base + r * u
        if x.min() > min_entry:
            return x


@dataclass(frozen=True)
class GradientCheckReport:
    k: int
    d: float
    eta: float
    points: int
    grad_tangent_max_abs: float
    hessian_top_eig_max: float
    fd_gradient_max_abs_err: float
    fd_hessian_max_rel_err: float


def f_gradient_check(d: float, k: int, points: int, eta: float | None,
                     rng: np.random.Generator, fd_step: float = 1e-3) -> GradientCheckReport:
    """Stationarity and curvature check for f_overlap around the uniform
    overlap: the tangent finite-difference gradient at uniform should vanish
    and the analytic tangent Hessian at sampled points with
    ||rho - uniform||_2 <= sqrt(eta) should have top eigenvalue <= -2 + 0.1.
    Analytic derivatives are cross-checked against finite differences.
    """
    if eta is None:
        eta = float(k) ** -4
    if eta > float(k) ** -4:
        raise ParameterError(f"eta={eta} exceeds the sufficient choice k^-4")
    fun = lambda x: f_overlap(x, d, k)
    base = np.full(k * k, 1.0 / k**2)

    fd_grad = _fd_tangent_gradient(fun, base, 1e-5)
    grad_max = float(np.abs(fd_grad).max())
    an_grad0 = tangent_gradient(f_grad_full(base, d, k))
    fd_grad_err = float(np.abs(fd_grad - an_grad0).max())

    radius = math.sqrt(eta)
    top_max = -math.inf
    hess_rel_err = 0.0
    for _ in range(points):
        x = _tangent_ball_point(k, radius, rng)
        an = tangent_hessian(f_hess_full(x, d, k))
        top = float(np.linalg.eigvalsh(an).max())
        top_max = max(top_max, top)
        fd = _fd_tangent_hessian(fun, x, fd_step)
        rel = float(np.abs(fd - an).max() / (1.0 + np.abs(an).max()))
        hess_rel_err = max(hess_rel_err, rel)
    return GradientCheckReport(
        k=k, d=d, eta=eta, points=points,
        grad_tangent_max_abs=grad_max,
        hessian_top_eig_max=top_max,
        fd_gradient_max_abs_err=fd_grad_err,
        fd_hessian_max_rel_err=hess_rel_err,
    )


@dataclass(frozen=True)
class SeparationScanReport:
    k: int
    d: float
    eta: float
    resolution: float
    grid_points: int
    f_uniform: float
    max_f_far: float
    gap: float
    argmax: tuple[float, ...]
    violated: bool
    marginal_note: str = "rows and columns fixed to exactly 1/k (absolute tolerance)"


def separation_scan(d: float, k: int, eta: float, resolution: float,
                    max_grid: int = 2 * 10**6) -> SeparationScanReport:
    """Scan f_overlap over the lattice of k x k matrices with every row and
    column summing to 1/k (entries multiples of ``resolution``), and report
    the worst value among points at distance > eta from uniform."""
    if resolution <= 0 or resolution > 1.0 / k:
        raise ParameterError(f"resolution {resolution} unusable for k={k}")
    steps = int(round(1.0 / k / resolution))
    axis = np.arange(steps + 1) / (steps * k)
    free = (k - 1) ** 2
    if (steps + 1) ** free > max_grid:
        raise ParameterError(
            f"grid of {(steps + 1) ** free} points exceeds cap {max_grid}; coarsen resolution"
        )
    target = 1.0 / k
    uniform = np.full(k * k, 1.0 / k**2)
    f_uniform = f_overlap(uniform, d, k)

    best_f = -math.inf
    best_point: np.ndarray | None = None
    count = 0
    eps = 1e-12
    for combo in itertools.product(axis, repeat=free):
        block = np.asarray(combo).reshape(k - 1, k - 1)
        last_col = target - block.sum(axis=1)
        last_row = target - block.sum(axis=0)
        if last_col.min() < -eps or last_row.min() < -eps:
            continue
        corner = target - last_row.sum()
        if corner < -eps:
            continue
        rho = np.zeros((k, k))
        rho[: k - 1, : k - 1] = block
        rho[: k - 1, k - 1] = np.clip(last_col, 0.0, None)
        rho[k - 1, : k - 1] = np.clip(last_row, 0.0, None)
        rho[k - 1, k - 1] = max(corner, 0.0)
        flat = rho.ravel()
        count += 1
        if np.linalg.norm(flat - uniform) <= eta:
            continue
        val = f_overlap(flat / flat.sum(), d, k)
        if val > best_f:
            best_f = val
            best_point = flat.copy()
    if best_point is None:
        raise ParameterError("no grid point beyond eta; enlarge the grid or shrink eta")
    gap = f_uniform - best_f
    return SeparationScanReport(
        k=k, d=d, eta=eta, resolution=resolution, grid_points=count,
        f_uniform=f_uniform, max_f_far=best_f, gap=gap,
        argmax=tuple(float(x) for x in best_point), violated=gap <= 0,
    )


def d_cond_asymptotic(k: int) -> float:
    """Large-k condensation threshold expansion (2k-1) ln k - 2 ln 2."""
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    return (2 * k - 1) * math.log(k) - 2 * math.log(2)


def first_moment_estimate(n: int, m: int, k: int) -> float:
    """log of the first-moment scale of the coloring count: n ln k + m ln(1 - 1/k)."""
    return n * math.log(k) + m * math.log(1.0 - 1.0 / k)
