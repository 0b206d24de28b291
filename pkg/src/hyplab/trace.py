"""Pre-trace-formula numerics: the Weyl density, geometric-side heat
sums over group balls with certified tails, spectral-side sums over
ingested eigenvalues, exponential-sum approximation of window
functions, and eigenvalue-count estimates.

The pointwise pre-trace formula for an even multiplier h with kernel k:

    Sum_j h(s_j) |psi_j(z)|^2 =
        (1/4 pi) Integral h(rho) tanh(pi rho) rho d rho
        + Sum_{gamma != id} k(d(z, gamma z)),

integrated over the fundamental domain gives the heat-trace identity
used by the tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure, IllConditioned
from .geom import Point, _dist_c
from .fuchsian import GroupSpec, group_ball, systole, _domain_samples, domain_volume
from .selberg import heat_kernel, _heat_profile


@dataclass
class EigenData:
    """An ingested eigenvalue list (nondecreasing, starting at 0) with
    the surface area and an optional quadrature mesh of eigenfunction
    samples (rows of ``values`` are eigenfunctions)."""

    volume: float
    eigenvalues: np.ndarray
    mesh_points: np.ndarray = None   # (n, 2)
    mesh_weights: np.ndarray = None  # (n,)
    mesh_values: np.ndarray = None   # (J, n)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if len(ev) == 0 or ev[0] != 0.0:
            raise ValueError("eigenvalue list must start at exactly 0")
        if np.any(np.diff(ev) < 0.0):
            raise ValueError("eigenvalues must be nondecreasing")
        self.eigenvalues = ev

    @property
    def has_mesh(self) -> bool:
        return self.mesh_values is not None

    def gram_deviation(self) -> float:
        """Max deviation of the eigenfunction Gram matrix under the mesh
        quadrature from the identity (reported, not enforced)."""
        if not self.has_mesh:
            return math.nan
        V = np.asarray(self.mesh_values, dtype=float)
        W = np.asarray(self.mesh_weights, dtype=float)
        gram = (V * W[None, :]) @ V.T
        return float(np.max(np.abs(gram - np.eye(len(V)))))


def load_eigendata(path) -> EigenData:
    with open(path) as fh:
        doc = json.load(fh)
    mesh = doc.get("mesh")
    kw = {}
    if mesh is not None:
        kw = dict(mesh_points=np.asarray(mesh["points"], dtype=float),
                  mesh_weights=np.asarray(mesh["weights"], dtype=float),
                  mesh_values=np.asarray(mesh["values"], dtype=float))
    return EigenData(volume=float(doc["volume"]),
                     eigenvalues=np.asarray(doc["eigenvalues"], dtype=float),
                     **kw)


def save_eigendata(E: EigenData, path) -> None:
    doc = {"volume": E.volume, "eigenvalues": list(map(float, E.eigenvalues))}
    if E.has_mesh:
        doc["mesh"] = {"points": E.mesh_points.tolist(),
                       "weights": E.mesh_weights.tolist(),
                       "values": E.mesh_values.tolist()}
    with open(path, "w") as fh:
        json.dump(doc, fh)


@dataclass
class ExpSumApprox:
    """A least-squares approximation g(x) ~ Sum_k a_k e^{-t_k x} of
    g(x) = f(x) e^x on [0, X_max], so f(x) ~ Sum_k a_k e^{-(t_k+1) x}."""

    coefficients: np.ndarray
    rates: np.ndarray
    sup_error: float
    ill_conditioned: bool = False

    def eval_g(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.outer(x, self.rates)) @ self.coefficients

    def eval_f(self, x):
        x = np.asarray(x, dtype=float)
        return self.eval_g(x) * np.exp(-x)


def weyl_density(f, quad_limit: float) -> float:
    """(1/4 pi) Integral_R f(1/4 + rho^2) tanh(pi rho) rho d rho for a
    bounded f supported in [0, 1/4 + quad_limit^2]."""
    if quad_limit <= 0.0:
        raise ValueError("quad_limit must be positive")
    val, err = integrate.quad(
        lambda rho: f(0.25 + rho * rho) * math.tanh(math.pi * rho) * rho,
        0.0, quad_limit, epsabs=1e-12, epsrel=1e-10, limit=400)
    if err > max(1e-10, 1e-8 * abs(val)):
        raise QuadratureFailure(
            f"weyl density quadrature error {err:.2e} too large")
    return val / (2.0 * math.pi)


def lattice_count_bound(R: float, ell: float) -> float:
    """Upper bound (cosh(R + ell) - 1)/(cosh ell - 1) for the number of
    group elements displacing a point by at most R."""
    return (math.cosh(R + ell) - 1.0) / (math.cosh(ell) - 1.0)


def _geometric_tail_bound(G: GroupSpec, t: float, R: float,
                          ell: float = None) -> float:
    """Certified bound for the omitted heat mass beyond displacement R:
    shell counts from the lattice bound times the (decreasing) kernel at
    the shell's inner radius."""
    if ell is None:
        ell = systole(G, search_radius=4.0)
    _, rho_max = _heat_profile(t)
    total = 0.0
    k = math.floor(R)
    while k <= rho_max + 1.0:
        total += lattice_count_bound(k + 1.0, ell) * heat_kernel(t, max(k, R))
        k += 1
    return total


def geometric_side(G: GroupSpec, z: Point, t: float, R: float):
    """Sum over the group ball at z of the heat kernel at the
    displacements, with a certified tail bound for the omitted elements.

    Returns (value, tail_bound).
    """
    if t <= 0.0 or R <= 0.0:
        raise ValueError("t and R must be positive")
    ball = group_ball(G, z, R)
    if ball.elements:
        disp = ball.displacements()
        value = float(np.sum(heat_kernel(t, disp)))
    else:
        value = 0.0
    return value, _geometric_tail_bound(G, t, R)


def geometric_side_domain_integral(G: GroupSpec, t: float, R: float,
                                   n: int, seed: int):
    """Monte Carlo Integral over the fundamental domain of the
    geometric side: Vol(D) times the domain average of
    Sum_gamma p_t(d(z, gamma z)).

    Returns (value, mc_error, tail_bound); the ball is enumerated once
    at the base point with radius covering every sample.
    """
    ball = group_ball(G, G.base_point, R + 2.0 * G.domain_radius)
    zc = _domain_samples(G, n, seed)
    vol_D, _ = domain_volume(G, n=4000, seed=seed + 1)
    if ball.elements:
        mats = ball.matrices()
        a, b = mats[:, 0][:, None], mats[:, 1][:, None]
        c, d = mats[:, 2][:, None], mats[:, 3][:, None]
        gz = (a * zc[None, :] + b) / (c * zc[None, :] + d)
        disp = _dist_c(gz, np.broadcast_to(zc[None, :], gz.shape))
        # count each element only while inside its own ball radius R
        contrib = np.where(disp <= R, heat_kernel(t, disp), 0.0).sum(axis=0)
    else:
        contrib = np.zeros(len(zc))
    value = vol_D * float(contrib.mean())
    err = vol_D * float(contrib.std(ddof=1)) / math.sqrt(n)
    tail = vol_D * _geometric_tail_bound(G, t, R)
    return value, err, tail


def heat_trace_spectral(E: EigenData, t: float):
    """Sum_j e^{-t lambda_j} over the ingested eigenvalues, plus the
    Weyl-density estimate of the truncation tail beyond the largest
    listed eigenvalue.  Returns (value, tail_estimate)."""
    if t <= 0.0:
        raise ValueError("t must be positive")
    lam_max = float(E.eigenvalues[-1])
    value = float(np.exp(-t * E.eigenvalues).sum())
    rho_lo = math.sqrt(max(lam_max - 0.25, 0.0))
    tail, _ = integrate.quad(
        lambda rho: math.exp(-t * (0.25 + rho * rho))
        * math.tanh(math.pi * rho) * rho, rho_lo, rho_lo + 40.0 / (1 + t),
        epsabs=1e-14, epsrel=1e-10, limit=200)
    return value, E.volume * tail / (2.0 * math.pi)


def exp_sum_fit(f, K: int, domain) -> ExpSumApprox:
    """Least-squares fit of g(x) = f(x) e^x by Sum_k a_k e^{-t_k x} with
    uniform rates t_k = k * Delta on a dense grid of [0, X_max].

    Delta is set so the largest rate resolves scale X_max / K; the
    normal equations carry a 1e-10 ridge, with the ill-conditioning flag
    set when the plain solve would be rank-deficient.
    """
    x_lo, x_hi = domain
    if x_lo != 0.0 or x_hi <= 0.0:
        raise ValueError("domain must be [0, X_max] with X_max > 0")
    grid = np.linspace(0.0, x_hi, 2001)
    g = np.asarray([f(x) for x in grid], dtype=float) * np.exp(grid)
    if K == 0:
        return ExpSumApprox(coefficients=np.array([]), rates=np.array([]),
                            sup_error=float(np.max(np.abs(g))))
    delta = 2.0 / x_hi
    rates = delta * np.arange(1, K + 1)
    A = np.exp(-np.outer(grid, rates))
    gram = A.T @ A
    cond = np.linalg.cond(gram)
    ill = bool(cond > 1e14)
    coef = np.linalg.solve(gram + 1e-10 * np.eye(K), A.T @ g)
    if not np.all(np.isfinite(coef)):
        raise IllConditioned("exponential-sum normal equations unsolvable")
    sup_error = float(np.max(np.abs(A @ coef - g)))
    return ExpSumApprox(coefficients=coef, rates=rates, sup_error=sup_error,
                        ill_conditioned=ill)


def smoothed_window(lam_lo: float, lam_hi: float, eps: float = 0.05):
    """A C^0 trapezoid approximation of the indicator of
    [lam_lo, lam_hi]: 1 inside, linear ramps of width eps outside."""

    def f(x):
        if x <= lam_lo - eps or x >= lam_hi + eps:
            return 0.0
        if x >= lam_lo and x <= lam_hi:
            return 1.0
        if x < lam_lo:
            return (x - (lam_lo - eps)) / eps
        return ((lam_hi + eps) - x) / eps

    return f


def eigencount_estimate(G: GroupSpec, E, interval, K: int = 40,
                        eps: float = 0.05, R: float = 6.0,
                        n: int = 2000, seed: int = 7):
    """Number of eigenvalues in ``interval`` = (lam_lo, lam_hi) of an
    interval inside (1/4, inf).

    Returns (estimate, weyl): with eigen-data the estimate is the exact
    count; without it, the smoothed Weyl term plus the geometric
    correction Sum_k a_k * Integral_D geometric_side(t_k + 1) obtained
    from the exponential-sum fit of the smoothed window.
    """
    lam_lo, lam_hi = interval
    if not 0.25 < lam_lo < lam_hi:
        raise ValueError("interval must lie in (1/4, inf)")
    f = smoothed_window(lam_lo, lam_hi, eps)
    quad_limit = math.sqrt(lam_hi + eps) + 1.0
    if E is not None:
        vol = E.volume
    else:
        vol, _ = domain_volume(G, n=4000, seed=seed + 1)
    weyl = vol * weyl_density(f, quad_limit)
    if E is not None:
        ev = E.eigenvalues
        estimate = float(np.count_nonzero((ev >= lam_lo) & (ev <= lam_hi)))
        return estimate, weyl
    fit = exp_sum_fit(f, K, (0.0, lam_hi + 1.0))
    correction = 0.0
    for a_k, t_k in zip(fit.coefficients, fit.rates):
        geom, _, _ = geometric_side_domain_integral(G, t_k + 1.0, R, n, seed)
        correction += a_k * geom
    return weyl + correction, weyl
