"""The reproducing-kernel Hilbert space of a triangular kernel, concretely.

Everything rests on one isometry: the RKHS of Cov = u(min) v(max) is

    H = { F(t) = v(t) * integral_0^{q(t)} g(x) dx : g in L2[0, T] },
    ||F||_H = ||g||_{L2[0,T]},      T = q(1),

and the representer of evaluation at t maps to psi(K(., t)) = v(t) *
1_{[0, q(t)]}. For a regression mean F_f(t) = integral_0^t f, the pre-image
in time coordinates is

    g(q(w)) = (f(w) v(w) - v'(w) F_f(w)) / (v(w)^2 q'(w)),

obtained by differentiating F/v along the clock. All integrals over the
clock domain [0, T] are pulled back to [0, 1] with the substitution
x = q(w), dx = q'(w) dw, so nothing ever needs q explicitly inverted except
the x-domain view of g, which inverts the monotone clock by bisection.

The finite-design operations live here too: the least-squares distance
D_n from g to the span of the design representers (computed cell by cell
against the q'-weighted cell means, each cell integral nonnegative, so no
cancellation), and Kriging interpolation, which the Markov structure
reduces to a two-knot rule: in the (q, y/v) plane the conditional
expectation is linear interpolation anchored at the origin. A dense
covariance solve is kept alongside as an oracle for both.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import sampling
from .errors import GridMismatch, KernelDegenerate, SingularCovariance
from .fourier import FourierFunction
from .kernels import GaussMarkovKernel, covariance, gram
from .quadrature import adaptive_integral, refine_gauss
from .samples import PathSample

_BISECT_ITERS = 60
_BISECT_TOL = 1e-12


def q_inverse(kernel: GaussMarkovKernel, x) -> np.ndarray:
    """Invert the clock q on [0,1] by bisection (60 halvings)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo = np.zeros_like(x)
    hi = np.ones_like(x)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        with np.errstate(all="ignore"):
            below = np.asarray(kernel.q(mid)) < x
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo) < _BISECT_TOL:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class RkhsElement:
    """An RKHS element F together with its L2 pre-image g.

    g_of_time is g composed with the clock (defined on [0,1]); g is the
    native x-domain view on [0, T]. breakpoints_w lists known kinks of
    g_of_time for the adaptive integrator.
    """

    kernel: GaussMarkovKernel
    g_of_time: Callable
    F: Callable
    source: str
    breakpoints_w: tuple = ()

    def g(self, x):
        w = q_inverse(self.kernel, x)
        out = np.asarray(self.g_of_time(w))
        return float(out[0]) if np.asarray(x).ndim == 0 else out

    def reproduce_F(self, t) -> np.ndarray:
        """v(t) * integral_0^{q(t)} g, evaluated by quadrature.

        For from_f elements this must reproduce the antiderivative F_f;
        the difference is a quadrature-level consistency check.
        """
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        kernel = self.kernel

        def integrand(w):
            return np.asarray(self.g_of_time(w)) * np.asarray(kernel.q_prime(w))

        vals = np.array([
            adaptive_integral(integrand, 0.0, float(s), breakpoints=self.breakpoints_w)
            if s > 0.0 else 0.0
            for s in ts
        ])
        out = np.asarray(kernel.v(ts)) * vals
        return float(out[0]) if np.asarray(t).ndim == 0 else out


def g_from_f(kernel: GaussMarkovKernel, f: FourierFunction) -> RkhsElement:
    """RKHS element of the regression mean F_f(t) = integral_0^t f."""

    def g_of_time(w):
        w = np.asarray(w, dtype=float)
        v = np.asarray(kernel.v(w))
        with np.errstate(all="ignore"):
            return (np.asarray(f(w)) * v - np.asarray(kernel.v_prime(w)) * np.asarray(f.antiderivative(w))) / (
                v * v * np.asarray(kernel.q_prime(w))
            )

    return RkhsElement(
        kernel=kernel,
        g_of_time=g_of_time,
        F=f.antiderivative,
        source="from_f",
    )


def element_from_g(kernel: GaussMarkovKernel, g: Callable,
                   breakpoints_x: Sequence[float] = ()) -> RkhsElement:
    """RKHS element with a directly prescribed x-domain pre-image g."""
    if not kernel.flags.finite_horizon:
        raise KernelDegenerate(
            f"kernel {kernel.name!r} has an infinite clock horizon; "
            "prescribe g through a mean function instead"
        )

    def g_of_time(w):
        return np.asarray(g(np.asarray(kernel.q(w))))

    def F(t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        qs = np.asarray(kernel.q(ts))
        vals = np.array([
            adaptive_integral(g, 0.0, float(x), breakpoints=breakpoints_x)
            if x > 0.0 else 0.0
            for x in qs
        ])
        out = np.asarray(kernel.v(ts)) * vals
        return float(out[0]) if np.asarray(t).ndim == 0 else out

    breaks_w = tuple(float(q_inverse(kernel, x)[0]) for x in breakpoints_x)
    return RkhsElement(
        kernel=kernel,
        g_of_time=g_of_time,
        F=F,
        source="from_g",
        breakpoints_w=breaks_w,
    )


def rkhs_norm(element: RkhsElement, rel_tol: float = 1e-9) -> float:
    """||F||_H = sqrt(integral_0^T g^2), via the clock substitution."""
    kernel = element.kernel

    def integrand(w):
        return np.asarray(element.g_of_time(w)) ** 2 * np.asarray(kernel.q_prime(w))

    value = adaptive_integral(integrand, 0.0, 1.0, rel_tol=rel_tol,
                              breakpoints=element.breakpoints_w)
    return float(np.sqrt(max(value, 0.0)))


def representer_gram(kernel: GaussMarkovKernel, ts) -> np.ndarray:
    """Gram matrix of the representers K(., t_j); equals the covariance."""
    return gram(kernel, ts)


# ---------------------------------------------------------------------------
# projection distance onto the design span


def projection_distance(kernel: GaussMarkovKernel, f: FourierFunction, n: int) -> float:
    """Squared L2 distance D_n from g to the span of the design representers.

    The representers at t_j = j/n span exactly the step functions on the
    clock cells (q(t_{j-1}), q(t_j)], so the projection has the q'-weighted
    cell means of g as coefficients and

        D_n = sum_j integral_{cell j} (g(q(w)) - alpha_j)^2 q'(w) dw,

    accumulated cell by cell (each term nonnegative; no cancellation).
    """
    if not kernel.flags.finite_horizon:
        raise KernelDegenerate(
            f"kernel {kernel.name!r} has an infinite clock horizon; "
            "the design span is not closed in L2 of the clock domain"
        )
    element = g_from_f(kernel, f)
    g_w = element.g_of_time
    qp = kernel.q_prime
    knots = np.arange(n + 1) / n
    dq = np.diff(np.asarray(kernel.q(knots)))
    total = 0.0
    for j in range(n):
        a, b = float(knots[j]), float(knots[j + 1])
        mass = refine_gauss(lambda w: np.asarray(g_w(w)) * np.asarray(qp(w)), a, b)
        alpha = mass / dq[j]
        total += refine_gauss(
            lambda w: (np.asarray(g_w(w)) - alpha) ** 2 * np.asarray(qp(w)), a, b
        )
    return float(total)


def projection_distance_dense(kernel: GaussMarkovKernel, f: FourierFunction,
                              n: int, grid_size: int = 10_000) -> float:
    """Brute-force oracle for D_n: weighted least squares for the
    coefficients of the n representers on a dense clock grid."""
    element = g_from_f(kernel, f)
    mid = (np.arange(grid_size) + 0.5) / grid_size
    weights = np.asarray(kernel.q_prime(mid)) / grid_size
    knots = np.arange(1, n + 1) / n
    design = np.asarray(kernel.v(knots))[None, :] * (mid[:, None] <= knots[None, :])
    sqw = np.sqrt(weights)
    target = np.asarray(element.g_of_time(mid)) * sqw
    solution, *_ = np.linalg.lstsq(design * sqw[:, None], target, rcond=None)
    residual = target - (design * sqw[:, None]) @ solution
    return float(residual @ residual)


# ---------------------------------------------------------------------------
# Kriging


def _design_knots(n: int) -> np.ndarray:
    return np.arange(1, n + 1) / n


def kriging_interpolate(kernel: GaussMarkovKernel, y, t):
    """Conditional expectation of the process at t given values y at j/n.

    O(n): in the (q, y/v) plane the Markov property makes the interpolant
    piecewise linear through the observations, anchored at the origin;
    multiply back by v(t). Requires v != 0 at every design knot, so kernels
    pinned at the endpoint (v(1) = 0, e.g. the bridge) are rejected: their
    design covariance is singular.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    knots = _design_knots(n)
    vk = np.asarray(kernel.v(knots))
    if not kernel.flags.v1_nonzero or np.any(np.abs(vk) < 1e-12):
        raise SingularCovariance(
            f"kernel {kernel.name!r} has v(1) = 0, so the design covariance at "
            "the knots is singular; Kriging through the pinned endpoint needs "
            "v(1) != 0"
        )
    qk = np.concatenate([[0.0], np.asarray(kernel.q(knots))])
    zk = np.concatenate([[0.0], y / vk])
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    qt = np.asarray(kernel.q(ts))
    out = np.interp(qt, qk, zk) * np.asarray(kernel.v(ts))
    return float(out[0]) if np.asarray(t).ndim == 0 else out


def kriging_interpolate_dense(kernel: GaussMarkovKernel, y, t):
    """Oracle: k(t)^T C^{-1} y with the dense design covariance C."""
    y = np.asarray(y, dtype=float)
    n = y.size
    knots = _design_knots(n)
    C = gram(kernel, knots)
    try:
        factor = cho_factor(C, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(
            f"design covariance for kernel {kernel.name!r} is singular"
        ) from exc
    alpha = cho_solve(factor, y)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    kvec = covariance(kernel, ts[:, None], knots[None, :])
    out = np.asarray(kvec) @ alpha
    return float(out[0]) if np.asarray(t).ndim == 0 else out


def kriging_residual_process(kernel: GaussMarkovKernel, n: int, seed: int,
                             grid_size: int | None = None) -> PathSample:
    """Draw the residual R = X - Krig(X at the knots) on a fine grid.

    R vanishes at the knots and is independent of the knot values; adding
    an independent Kriging interpolation of fresh knot data reassembles a
    process with the original law.
    """
    m = grid_size if grid_size is not None else 20 * n + 1
    if (m - 1) % n != 0:
        raise GridMismatch(
            f"grid of size {m} does not contain every design knot j/{n}"
        )
    grid = np.arange(m) / (m - 1)
    path = sampling.sample_paths(kernel, grid, 1, seed, label="residual")[0]
    idx = (np.arange(1, n + 1) * ((m - 1) // n)).astype(int)
    residual = path - kriging_interpolate(kernel, path[idx], grid)
    residual[0] = 0.0
    return PathSample(
        grid=grid,
        values=residual,
        kernel_id=kernel.name,
        function_id="residual",
        seed=seed,
        scale=1.0,
    )
