"""Counting eigenvalues pulled into a spectral gap by a compact perturbation.

Three routes to the same counting function, kept numerically independent:

* sjstar_sj: Gram matrix of the band-limited, gap-weighted kernel
  (2 pi)^{-1/2} V(x,y)^{1/2} e^{iky} psi_inf(x;k) (g_j(k) + lam)^{-1/2}
  over a momentum half-line, with closed-form section integrals in y.
* antiwick_matrix: the same operator reassembled from coherent-family
  overlap integrals by tensor Gauss quadrature over the phase plane.
* bs_count: the resolvent route n_-(1; V^{1/2}(H0 - z)^{-1} V^{1/2})
  with the resolvent kernel summed over fiber eigenpairs.

Cross-route agreement (exact for the first two on a shared grid, up to
an additive O(1) for the third) is the package's main self-check.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np

from .counting import LogHermitian, count_above, count_below
from .errors import TruncationWarning
from .fiber import FiberDiscretization, GapModel, gap_edges, solve_fiber
from .operators import (DiscretizedOperator, QuadratureSpec, gauss_panel_rule,
                        polygon_x_rule, product_gram, sections_at)
from .oscillator import p_coeff, psi_inf

_TAIL_REL = 1e-16


def _log_envelope(j: int, b: float, x_ref: float, k):
    """ln of the squared-kernel magnitude envelope p_j k^{2j-2} e^{-(k/sqrt(b)-sqrt(b)x)^2}."""
    k = np.asarray(k, dtype=float)
    poly = (2 * j - 2) * np.log(np.maximum(np.abs(k), 1e-300))
    return math.log(p_coeff(j, b)) + poly - (k / math.sqrt(b) - math.sqrt(b) * x_ref) ** 2


def k_truncation(j: int, b: float, x_sup: float, a: float = 0.0,
                 rel: float = _TAIL_REL) -> float:
    """Smallest K beyond which the kernel envelope is below rel times its
    in-window maximum; the Gaussian factor makes the tail certifiable."""
    rb = math.sqrt(b)
    lo = max(a, 1e-6)
    grid = np.arange(lo, b * abs(x_sup) + 14.0 * rb, 0.01 * rb)
    vals = _log_envelope(j, b, x_sup, grid)
    peak_idx = int(np.argmax(vals))
    cut = vals[peak_idx] + math.log(rel)
    below = np.nonzero(vals[peak_idx:] < cut)[0]
    if len(below) == 0:
        warnings.warn("envelope tail still above the relative cutoff at the "
                      "search boundary", TruncationWarning)
        return float(grid[-1])
    return float(grid[peak_idx + below[0]])


def k_truncation_symmetric(j: int, b: float, x_inf: float, x_sup: float,
                           rel: float = _TAIL_REL) -> float:
    """Two-sided truncation K with the envelope below rel·max outside
    (-K, K), for whole-line discretizations."""
    rb = math.sqrt(b)
    reach = b * max(abs(x_inf), abs(x_sup)) + 14.0 * rb
    grid = np.arange(-reach, reach, 0.01 * rb)
    vals = np.maximum(_log_envelope(j, b, x_sup, grid),
                      _log_envelope(j, b, x_inf, grid))
    cut = vals.max() + math.log(rel)
    inside = np.nonzero(vals >= cut)[0]
    return float(max(abs(grid[inside[0]]), abs(grid[inside[-1]])))


@lru_cache(maxsize=32)
def get_gap_model(b: float, w, j: int, k_lo: float, k_hi: float,
                  n: int = 2001) -> GapModel:
    return GapModel(b, w, j, k_lo, k_hi, n=n)


def _zero_operator(k_pts, k_wts, meta) -> DiscretizedOperator:
    nk = len(k_pts)
    kernel = LogHermitian(np.full((nk, nk), -np.inf), np.zeros((nk, nk)))
    return DiscretizedOperator(nodes=k_pts, weights=k_wts, kernel=kernel, meta=meta)


def _psi_log_factors(j: int, b: float, x_pts, k_pts):
    """(log|psi_inf|, sign) on the (x, k) tensor grid."""
    vals = psi_inf(j, k_pts[None, :], x_pts[:, None], b)
    sign = np.where(vals >= 0, 1.0, -1.0)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(vals))
    return logmag, sign


def _x_rule_for_support(poly, b, k_hi, quad):
    # exponent rate of psi_inf^2 in x is ~ 2 sqrt(b) |t|, |t| <= kernel reach
    xa, xb = poly.x_extent
    rate = 2.0 * (abs(k_hi) + b * max(abs(xa), abs(xb))) + 2.0
    width = quad.x_rate / rate
    return polygon_x_rule(poly, width, quad.x_nodes)


def sjstar_sj(j: int, lam: float, a: float, quad: QuadratureSpec, v, w, b: float,
              gap_model: GapModel = None, k_lo: float = None,
              k_hi: float = None, y_order: int = 0) -> DiscretizedOperator:
    """Gram matrix S*S of the gap-weighted band kernel on (a, K).

    Entries M(k,k') = (2 pi)^{-1} F(k)F(k') * int V(x,y) psi_inf(x;k)
    psi_inf(x;k') e^{i(k-k')y} dx dy with F = (g_j + lam)^{-1/2};
    the truncation K is set by the certified Gaussian envelope rule.
    """
    if lam <= 0:
        raise ValueError("lam must be positive (strictly inside the gap)")
    if v is None or v.amplitude == 0.0:
        k_pts, k_wts = gauss_panel_rule(a, a + 1.0, quad.k_panels, quad.k_nodes)
        return _zero_operator(k_pts, k_wts, {"j": j, "lam": lam, "a": a})
    if k_hi is None:
        k_hi = k_truncation(j, b, v.support.x_extent[1], a)
    if k_lo is None:
        k_lo = a
    k_pts, k_wts = gauss_panel_rule(k_lo, k_hi, quad.k_panels, quad.k_nodes)
    if gap_model is None:
        gap_model = get_gap_model(b, w, j, k_lo, k_hi)
    log_row = np.log(gap_model.weight(k_pts, lam))
    x_pts, x_wts = _x_rule_for_support(v.support, b, k_hi, quad)
    secs = sections_at(v.support, x_pts)
    x_logmag, x_sign = _psi_log_factors(j, b, x_pts, k_pts)
    op = product_gram(k_pts, k_wts, log_row, x_pts, x_wts, x_logmag, x_sign,
                      secs, 1.0, math.log(v.amplitude / (2.0 * math.pi)),
                      y_order=y_order,
                      meta={"j": j, "lam": lam, "a": a, "k_hi": k_hi,
                            "y_route": "gauss" if y_order else "sections"})
    return op


def antiwick_matrix(j: int, lam: float, scenario,
                    quad: QuadratureSpec = None) -> DiscretizedOperator:
    """Weighted coherent-family operator diag(F) V_op diag(F) on (-K, K).

    V_op(k,k') is assembled from the overlap integrals of the coherent
    family over the phase plane, (2 pi)^{-1} int V(q,p) Psi_{q,p}(k)
    conj(Psi_{q,p}(k')) dq dp, by tensor Gauss quadrature in both phase
    variables: an independent numerical route to the whole-line Gram.
    """
    quad = quad or scenario.quad
    v, w, b = scenario.v, scenario.w, scenario.b
    k_sym = k_truncation_symmetric(j, b, v.support.x_extent[0],
                                   v.support.x_extent[1])
    return sjstar_sj(j, lam, -k_sym, quad, v, w, b,
                     k_lo=-k_sym, k_hi=k_sym, y_order=max(quad.y_order, 12))


def full_line_gram(j: int, lam: float, scenario,
                   quad: QuadratureSpec = None) -> DiscretizedOperator:
    """sjstar_sj on the same symmetric window as antiwick_matrix, with the
    closed-form section route (the matched-grid partner for route checks)."""
    quad = quad or scenario.quad
    v, w, b = scenario.v, scenario.w, scenario.b
    k_sym = k_truncation_symmetric(j, b, v.support.x_extent[0],
                                   v.support.x_extent[1])
    return sjstar_sj(j, lam, -k_sym, quad, v, w, b, k_lo=-k_sym, k_hi=k_sym)


def effective_count(j: int, lam: float, eps: float, scenario,
                    quad: QuadratureSpec = None):
    """(lower, upper) bracket of the gap counting function at depth lam:
    n_+(1+eps; S*S) and n_+(1-eps; S*S)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    quad = quad or scenario.quad
    op = sjstar_sj(j, lam, scenario.a_momentum, quad, scenario.v, scenario.w,
                   scenario.b)
    cap = getattr(scenario, "precision_bits", 512)
    lower = count_above(op.kernel, 1.0 + eps, precision_cap=cap).count
    upper = count_above(op.kernel, 1.0 - eps, precision_cap=cap).count
    return lower, upper


def _support_nodes(v, quad, b, k_reach):
    """Tensor quadrature nodes (x, y, weight) over supp V."""
    x_pts, x_wts = _x_rule_for_support(v.support, b, k_reach, quad)
    order = max(quad.y_order, 12)
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    xs, ys, ws = [], [], []
    for x, wx in zip(x_pts, x_wts):
        for y1, y2 in v.support.vertical_sections(float(x)):
            mid, half = 0.5 * (y1 + y2), 0.5 * (y2 - y1)
            xs.append(np.full(order, x))
            ys.append(mid + half * base_x)
            ws.append(wx * half * base_w)
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


def bs_count(j: int, lam: float, scenario, quad: QuadratureSpec = None,
             j_sum: int = None) -> int:
    """n_-(1; V^{1/2}(H0 - z)^{-1}V^{1/2}) at z = E_j^+ + lam.

    The resolvent kernel is expanded over fiber eigenpairs j' <= j_sum
    (default 2j+2) and integrated over momentum; the band-j denominator
    uses the gap model so (g + lam) stays exactly positive far in the
    Gaussian tail.  Serves as the cross-route oracle for effective_count.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    quad = quad or scenario.quad
    v, w, b = scenario.v, scenario.w, scenario.b
    if v is None or v.amplitude == 0.0:
        return 0
    j_sum = j_sum or (2 * j + 2)
    edge = gap_edges(b, w, j)[0]
    z = edge + lam
    k_sym = k_truncation_symmetric(j, b, v.support.x_extent[0],
                                   v.support.x_extent[1])
    xs, ys, ws = _support_nodes(v, quad, b, k_sym)
    gap_model = get_gap_model(b, w, j, -k_sym, k_sym)
    disc = FiberDiscretization(b=b, w=w)
    panels = max(quad.k_panels, int(math.ceil(2.0 * k_sym / math.sqrt(b))))
    k_pts, k_wts = gauss_panel_rule(-k_sym, k_sym, panels, quad.k_nodes)
    nn = len(xs)
    mat = np.zeros((nn, nn), dtype=complex)
    last_band = np.zeros((nn, nn), dtype=complex)
    root_v = np.sqrt(v.amplitude * ws)
    for k, wk in zip(k_pts, k_wts):
        pairs = solve_fiber(disc, float(k), j_sum)
        grid = disc.grid(float(k))
        phase = np.exp(1j * k * ys)
        for pair in pairs:
            if pair.j == j:
                denom = -(float(gap_model.gap(k)) + lam)
            else:
                denom = pair.energy - z
            vec = np.interp(xs, grid, pair.values, left=0.0, right=0.0)
            col = root_v * vec * phase
            term = (wk / (2.0 * math.pi * denom)) * np.outer(col, col.conj())
            mat += term
            if pair.j == j_sum:
                last_band += term
    # the last retained band bounds the first omitted one (1/(E - z) decays)
    remainder = float(np.abs(np.linalg.eigvalsh(last_band)).max())
    if remainder > 0.25:
        warnings.warn(f"last fiber level still contributes {remainder:.3f} "
                      "in operator norm; raise j_sum", TruncationWarning)
    report = count_below(mat, 1.0)
    return report.count
