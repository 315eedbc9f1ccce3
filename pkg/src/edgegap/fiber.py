"""Fiber operators h(k) = -d^2/dx^2 + (bx - k)^2 + W(x) and their bands.

Second-order finite differences with Dirichlet walls on a moving window
centered at x = k/b, where the eigenfunctions concentrate.  Energies are
Richardson-extrapolated from a full- and half-resolution solve of the
same window (h^4 accuracy); eigenvectors come from the full solve.

Near a band edge the gap distance dies like a Gaussian in k and falls
below double-precision resolution of the edge value.  It is therefore
computed as an eigenvalue difference between the operator with W and
the same-grid operator with the constant potential W_+, refined by
Rayleigh-quotient iteration in arbitrary precision: the two solves share
every discretization error to leading order, so the tiny difference
survives at full relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceFailure, NoGap, WrongPotentialKind
from .oscillator import psi_inf
from .potentials import EdgePotential, gap_condition

_GAUSS_NODES = 24


@dataclass(frozen=True)
class FiberDiscretization:
    """Finite-difference window for the fiber operators.

    Domain is [k/b - half_width, k/b + half_width] with n grid points
    and Dirichlet walls; w is None for the free (Landau) fiber.
    """

    b: float = 1.0
    w: EdgePotential = None
    n: int = 2001
    half_width: float = None

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("field strength b must be positive")
        if self.half_width is None:
            object.__setattr__(self, "half_width", 12.0 / math.sqrt(self.b))
        if self.n < 200:
            raise ValueError("need at least 200 grid points")
        if self.half_width < 8.0 / math.sqrt(self.b):
            raise ValueError("half_width below the Gaussian decay margin 8/sqrt(b)")

    def grid(self, k: float, n: int = None) -> np.ndarray:
        n = self.n if n is None else n
        c = k / self.b
        return np.linspace(c - self.half_width, c + self.half_width, n)

    def tridiagonal(self, k: float, n: int = None, w_override=None):
        """(x, diag, offdiag, h) of the discretized fiber operator.

        w_override replaces the potential samples (used for the
        constant-W_+ comparison operator on the identical grid).
        """
        x = self.grid(k, n)
        h = x[1] - x[0]
        pot = np.zeros_like(x)
        if w_override is not None:
            pot += w_override
        elif self.w is not None:
            pot = np.asarray(self.w.cell_average(x, h), dtype=float)
        diag = 2.0 / h ** 2 + (self.b * x - k) ** 2 + pot
        off = np.full(len(x) - 1, -1.0 / h ** 2)
        return x, diag, off, h


@dataclass(frozen=True)
class FiberEigenpair:
    j: int
    k: float
    energy: float
    values: np.ndarray
    overlap_with_limit: float


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def solve_fiber(disc: FiberDiscretization, k: float, j_max: int,
                conv_tol: float = 1e-3):
    """Lowest j_max eigenpairs of the fiber operator at momentum k.

    Energies are Richardson-extrapolated over the (n, (n+1)//2) grid
    pair; the h^2 correction estimate must stay below conv_tol or
    ConvergenceFailure is raised.  Eigenvectors are trapezoid-normalized
    with sign fixed by a nonnegative overlap with the limiting
    eigenfunction.
    """
    if j_max < 1 or j_max > disc.n // 10:
        raise ValueError("need 1 <= j_max <= n/10")
    x, diag, off, h = disc.tridiagonal(k)
    evals, evecs = eigh_tridiagonal(diag, off, select="i",
                                    select_range=(0, j_max - 1))
    n_half = (disc.n + 1) // 2
    _, diag2, off2, _ = disc.tridiagonal(k, n=n_half)
    evals_half = eigh_tridiagonal(diag2, off2, select="i",
                                  select_range=(0, j_max - 1),
                                  eigvals_only=True)
    rich = (4.0 * evals - evals_half) / 3.0
    resid = np.abs(evals - evals_half) / 3.0
    if np.any(resid > conv_tol):
        raise ConvergenceFailure(
            f"h^2 correction {resid.max():.3e} above {conv_tol:g} at k={k}; refine the grid")
    weights = _trapezoid_weights(disc.n, h)
    pairs = []
    for idx in range(j_max):
        vec = evecs[:, idx]
        vec = vec / math.sqrt(float(np.sum(weights * vec * vec)))
        limit = psi_inf(idx + 1, k, x, disc.b)
        c = float(np.sum(weights * vec * limit))
        if c < 0:
            vec, c = -vec, -c
        pairs.append(FiberEigenpair(j=idx + 1, k=k, energy=float(rich[idx]),
                                    values=vec, overlap_with_limit=min(c, 1.0)))
    return pairs


def gap_edges(b: float, w, j: int):
    """(upper edge of band j, lower edge of band j+1) = (b(2j-1)+W_+, b(2j+1)+W_-)."""
    if j < 1:
        raise ValueError("level j must be >= 1")
    w_minus, w_plus = (0.0, 0.0) if w is None else (w.w_minus_limit, w.w_plus_limit)
    if w is not None and not gap_condition(w, b):
        raise NoGap(f"W_+ - W_- = {w_plus - w_minus} >= 2b = {2 * b}")
    return (b * (2 * j - 1) + w_plus, b * (2 * j + 1) + w_minus)


@dataclass(frozen=True)
class BandTable:
    k_grid: np.ndarray
    energies: np.ndarray  # shape (j_max, len(k_grid))
    edges: tuple  # gap_edges(b, w, j) for j = 1..j_max


def band_table(disc: FiberDiscretization, k_grid, j_max: int) -> BandTable:
    k_grid = np.asarray(k_grid, dtype=float)
    energies = np.empty((j_max, len(k_grid)))
    for i, k in enumerate(k_grid):
        for pair in solve_fiber(disc, float(k), j_max):
            energies[pair.j - 1, i] = pair.energy
    if np.any(np.diff(energies, axis=0) <= 0):
        raise ConvergenceFailure("band interlacing violated; spectrum should be simple")
    edges = tuple(gap_edges(disc.b, disc.w, j) for j in range(1, j_max + 1))
    return BandTable(k_grid=k_grid, energies=energies, edges=edges)


def _split_points(w: EdgePotential):
    if w is None:
        return ()
    if w.kind == "step":
        return (w.x0,)
    if w.kind == "two_step_upper":
        return (-w.delta,)
    if w.kind == "piecewise_constant":
        return w.breakpoints
    return ()


def phi_squared(j: int, k: float, b: float, w: EdgePotential) -> float:
    """Phi_j(k)^2 = int (W_+ - W(x + k/b)) psi_tilde_{j,inf}(x)^2 dx.

    psi_tilde is the recentered limiting eigenfunction b^{1/4} phi_j(sqrt(b) x);
    Gauss panels split at the (shifted) potential breakpoints.
    """
    w_plus = w.w_plus_limit
    reach = 10.0 / math.sqrt(b)
    cuts = sorted({-reach, reach} | {c - k / b for c in _split_points(w)
                                     if -reach < c - k / b < reach})
    nodes, wts = np.polynomial.legendre.leggauss(_GAUSS_NODES)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        panels = max(2, int(math.ceil((hi - lo) * math.sqrt(b))))
        edges = np.linspace(lo, hi, panels + 1)
        for a, c in zip(edges[:-1], edges[1:]):
            t = 0.5 * (a + c) + 0.5 * (c - a) * nodes
            vals = (w_plus - np.asarray(w(t + k / b), dtype=float)) \
                * psi_inf(j, 0.0, t, b) ** 2
            total += 0.5 * (c - a) * float(np.sum(wts * vals))
    return max(total, 0.0)


@dataclass(frozen=True)
class EdgeComparison:
    """High-precision gap-edge data at one momentum.

    gap_dist is E_j(k; W_+) - E_j(k; W) on the shared grid (equal to the
    continuum gap distance up to an O(h^2) relative bias); overlap is the
    inner product of the two refined eigenvectors; scaled_distance is
    2 sqrt(1 - overlap^2) / sqrt(gap_dist), evaluated before leaving
    arbitrary precision so neither factor under- or overflows.
    """

    j: int
    k: float
    gap_dist: float
    overlap: float
    scaled_distance: float
    energy_w: float
    energy_limit: float


def _mp_tridiag_solve(diag, off, shift, rhs):
    """Solve (T - shift) u = rhs for tridiagonal T, partial pivoting.

    diag/off/rhs are mpmath vectors; returns the solution list.
    """
    n = len(diag)
    a = [diag[i] - shift for i in range(n)]
    lower = [off[i] for i in range(n - 1)]
    upper = [off[i] for i in range(n - 1)]
    extra = [mpmath.mpf(0)] * n  # second superdiagonal fill from pivoting
    b = list(rhs)
    for i in range(n - 1):
        if abs(lower[i]) > abs(a[i]):
            a[i], lower[i] = lower[i], a[i]
            if i < n - 1:
                upper[i], a[i + 1] = a[i + 1], upper[i]
            if i < n - 2:
                extra[i], upper[i + 1] = upper[i + 1], extra[i]
            b[i], b[i + 1] = b[i + 1], b[i]
        m = lower[i] / a[i]
        a[i + 1] -= m * upper[i]
        if i < n - 2:
            upper[i + 1] -= m * extra[i]
        b[i + 1] -= m * b[i]
    u = [mpmath.mpf(0)] * n
    u[n - 1] = b[n - 1] / a[n - 1]
    if n > 1:
        u[n - 2] = (b[n - 2] - upper[n - 2] * u[n - 1]) / a[n - 2]
    for i in range(n - 3, -1, -1):
        u[i] = (b[i] - upper[i] * u[i + 1] - extra[i] * u[i + 2]) / a[i]
    return u


def _mp_rayleigh_refine(diag_f, off_f, theta0, v0, iters=4):
    """Rayleigh-quotient iteration from a double-precision seed.

    Cubically convergent; with a seed vector good to ~1e-8 a handful of
    iterations reach working precision.  Returns (theta, v) in mpmath.
    """
    n = len(diag_f)
    diag = [mpmath.mpf(float(d)) for d in diag_f]
    off = [mpmath.mpf(float(o)) for o in off_f]
    v = [mpmath.mpf(float(val)) for val in v0]
    nrm = mpmath.sqrt(mpmath.fsum(val * val for val in v))
    v = [val / nrm for val in v]
    theta = mpmath.mpf(float(theta0))
    for _ in range(iters):
        u = _mp_tridiag_solve(diag, off, theta, v)
        nrm = mpmath.sqrt(mpmath.fsum(val * val for val in u))
        v = [val / nrm for val in u]
        tv = [diag[i] * v[i]
              + (off[i - 1] * v[i - 1] if i > 0 else 0)
              + (off[i] * v[i + 1] if i < n - 1 else 0)
              for i in range(n)]
        theta = mpmath.fsum(v[i] * tv[i] for i in range(n))
    return theta, v


def _comparison_dps(j: int, k: float, b: float) -> int:
    # the gap distance scales like exp(-k^2/b); keep ~25 digits beyond it
    return max(50, int(25 + (k * k / b) / math.log(10.0)))


@lru_cache(maxsize=256)
def _edge_comparison_cached(j, k, b, w, n, half_width):
    disc = FiberDiscretization(b=b, w=w, n=n, half_width=half_width)
    x, diag_w, off, h = disc.tridiagonal(k)
    w_plus = 0.0 if w is None else w.w_plus_limit
    _, diag_p, _, _ = disc.tridiagonal(k, w_override=w_plus)
    i0 = j - 1
    ev_w, vec_w = eigh_tridiagonal(diag_w, off, select="i", select_range=(i0, i0))
    ev_p, vec_p = eigh_tridiagonal(diag_p, off, select="i", select_range=(i0, i0))
    with mpmath.workdps(_comparison_dps(j, k, b)):
        th_w, v_w = _mp_rayleigh_refine(diag_w, off, ev_w[0], vec_w[:, 0])
        th_p, v_p = _mp_rayleigh_refine(diag_p, off, ev_p[0], vec_p[:, 0])
        gap = th_p - th_w
        c = abs(mpmath.fsum(a * bb for a, bb in zip(v_w, v_p)))
        c = min(c, mpmath.mpf(1))
        dist = 2 * mpmath.sqrt((1 - c) * (1 + c))
        scaled = dist / mpmath.sqrt(gap) if gap > 0 else mpmath.mpf(0)
        return EdgeComparison(j=j, k=k, gap_dist=float(gap), overlap=float(c),
                              scaled_distance=float(scaled),
                              energy_w=float(th_w), energy_limit=float(th_p))


def edge_comparison(disc: FiberDiscretization, j: int, k: float) -> EdgeComparison:
    """Gap distance and projection overlap against the same-grid limit operator."""
    return _edge_comparison_cached(j, k, disc.b, disc.w, disc.n, disc.half_width)


def gap_distance(disc: FiberDiscretization, j: int, k: float) -> float:
    """E_j^+ edge distance of band j at momentum k, exact far below 1 ulp
    of the edge value."""
    return edge_comparison(disc, j, k).gap_dist


def trace_norm_distance(c: float) -> float:
    """||P - Q||_1 = 2 sqrt(1 - c^2) for rank-one projections with
    |<p, q>| = c; exact, no operator discretization involved."""
    c = abs(c)
    if c > 1.0:
        raise ValueError("overlap magnitude cannot exceed 1")
    return 2.0 * math.sqrt((1.0 - c) * (1.0 + c))


def projection_distance(j: int, k: float, disc: FiberDiscretization) -> float:
    """Trace-norm distance of the rank-one band projection from its limit.

    The limit projection is discretized as the same-grid constant-W_+
    operator, so the distance is exactly 0 when W vanishes.  May
    underflow to 0.0 at momenta where the overlap defect drops below
    double range.
    """
    if disc.w is None:
        return 0.0
    return trace_norm_distance(edge_comparison(disc, j, k).overlap)


class GapModel:
    """Cached spline model of the edge distance g_j(k) = E_j^+ - E_j(k).

    Node values use the cheap double-precision Richardson energies while
    g > 1e-6 and switch to the same-grid twin comparison below, where the
    edge distance is unrepresentable as a difference of doubles.  The
    spline interpolates ln g (slowly varying: asymptotically a parabola
    in k), and weight(k, lam) = (g + lam)^{-1/2} is the resolvent-type
    factor used in kernel assembly.
    """

    _DOUBLE_FLOOR = 1e-6

    def __init__(self, b: float, w: EdgePotential, j: int,
                 k_lo: float, k_hi: float, n: int = 2001,
                 spacing: float = None):
        self.b, self.w, self.j = b, w, j
        self.k_lo, self.k_hi = float(k_lo), float(k_hi)
        self.disc = FiberDiscretization(b=b, w=w, n=n)
        if w is None:
            self._spline = None
            return
        if spacing is None:
            spacing = 0.5 * math.sqrt(b)
        count = max(4, int(math.ceil((self.k_hi - self.k_lo) / spacing)) + 1)
        nodes = np.linspace(self.k_lo, self.k_hi, count)
        edge = gap_edges(b, w, j)[0]
        vals = []
        for k in nodes:
            g = edge - solve_fiber(self.disc, float(k), j)[j - 1].energy
            if g <= self._DOUBLE_FLOOR:
                g = edge_comparison(self.disc, j, float(k)).gap_dist
            vals.append(g)
        from scipy.interpolate import CubicSpline
        self._spline = CubicSpline(nodes, np.log(vals), extrapolate=False)

    def gap(self, k):
        """Edge distance at momentum k (vectorized)."""
        if self._spline is None:
            return np.zeros_like(np.asarray(k, dtype=float))
        out = np.exp(self._spline(k))
        if np.any(np.isnan(out)):
            raise ValueError(
                f"momentum outside the modeled range [{self.k_lo}, {self.k_hi}]")
        return out

    def weight(self, k, lam: float):
        """(g_j(k) + lam)^{-1/2}, the kernel weight at gap depth lam."""
        if lam <= 0:
            raise ValueError("lam must lie strictly inside the gap (lam > 0)")
        return 1.0 / np.sqrt(self.gap(k) + lam)


def verify_tep2(j: int, b: float, w: EdgePotential, k_list,
                n: int = 2001):
    """Ratios (E_j^+ - E_j(k)) / Phi_j(k)^2, expected -> 1 from above."""
    disc = FiberDiscretization(b=b, w=w, n=n)
    return [edge_comparison(disc, j, float(k)).gap_dist
            / phi_squared(j, float(k), b, w) for k in k_list]


def verify_teth1(j: int, b: float, w: EdgePotential, k_list,
                 n: int = 2001):
    """Scaled projection distances (E_j^+ - E_j(k))^{-1/2} ||pi - pi_inf||_1.

    Expected to decay to 0 along increasing k; identically 0 for W = None
    by the documented convention.
    """
    if w is None:
        return [0.0 for _ in k_list]
    disc = FiberDiscretization(b=b, w=w, n=n)
    return [edge_comparison(disc, j, float(k)).scaled_distance for k in k_list]


def verify_lau25(j: int, b: float, w: EdgePotential, k_list):
    """Ratios of Phi_j(k)^2 to its closed-form step asymptote, expected -> 1.

    The asymptote is 4^{j-1} ((w_+ - w_-)/2) p_j k^{2j-3}
    exp(-(k/sqrt(b) - sqrt(b) x0)^2), the square of the leading
    eigenfunction tail integrated against the step; the 4^{j-1} carries
    the squared leading Hermite coefficient.
    """
    if w is None or w.kind != "step":
        raise WrongPotentialKind("closed-form tail asymptote requires a sharp step")
    from .oscillator import p_coeff
    out = []
    for k in k_list:
        k = float(k)
        asym = (4.0 ** (j - 1) * 0.5 * (w.w_plus_limit - w.w_minus_limit)
                * p_coeff(j, b) * k ** (2 * j - 3)
                * math.exp(-(k / math.sqrt(b) - math.sqrt(b) * w.x0) ** 2))
        out.append(phi_squared(j, k, b, w) / asym)
    return out
