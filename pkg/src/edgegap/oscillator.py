"""Harmonic oscillator eigenfunctions and their large-momentum tails.

phi(j) is the j-th normalized Hermite function (levels start at j=1),
psi_inf translates and rescales it into the limiting fiber eigenfunction
at field strength b, concentrated near x = k/b.
"""

from __future__ import annotations

import math

import numpy as np


def _hermite_poly_part(j: int, x):
    """phi_j(x) * e^{x^2/2}: the normalized polynomial factor.

    Three-term recurrence in the normalized scale,
        P_0 = pi^{-1/4},  P_{q+1} = x sqrt(2/(q+1)) P_q - sqrt(q/(q+1)) P_{q-1},
    which stays bounded in scale where raw Hermite polynomials H_q
    overflow (H_q blows up near q ~ 150 in double precision).
    """
    p_prev = np.zeros_like(x)
    p = np.full_like(x, math.pi ** -0.25)
    for q in range(j - 1):
        p, p_prev = x * math.sqrt(2.0 / (q + 1)) * p - math.sqrt(q / (q + 1.0)) * p_prev, p
    return p


def phi(j: int, x):
    """Normalized oscillator eigenfunction, level j >= 1."""
    if j < 1:
        raise ValueError("level j must be >= 1")
    x = np.asarray(x, dtype=float)
    out = _hermite_poly_part(j, x) * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def psi_inf(j: int, k, x, b: float):
    """Limiting fiber eigenfunction b^{1/4} phi_j(sqrt(b) x - k/sqrt(b)).

    L2-normalized in x for every momentum k.
    """
    if b <= 0:
        raise ValueError("field strength b must be positive")
    rb = math.sqrt(b)
    return b ** 0.25 * phi(j, rb * np.asarray(x, dtype=float) - np.asarray(k, dtype=float) / rb)


def p_coeff(j: int, b: float) -> float:
    """Tail normalization constant b^{-j+3/2} / (sqrt(pi) (j-1)! 2^{j-1})."""
    if j < 1:
        raise ValueError("level j must be >= 1")
    if b <= 0:
        raise ValueError("field strength b must be positive")
    return b ** (-j + 1.5) / (math.sqrt(math.pi) * math.factorial(j - 1) * 2.0 ** (j - 1))


def psi_inf_asymptotic(j: int, k, x, b: float):
    """Leading large-k form of psi_inf on compact x sets.

    2^{j-1} p_j^{1/2} (-k)^{j-1} exp(-(k/sqrt(b) - sqrt(b) x)^2 / 2).

    The 2^{j-1} factor is the leading Hermite coefficient carried by
    phi_j; with it the ratio to psi_inf tends to 1 as k -> +infinity
    (for j=1 the form is exact).  Verified against direct evaluation
    in the tests.
    """
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    rb = math.sqrt(b)
    arg = k / rb - rb * x
    out = (2.0 ** (j - 1) * math.sqrt(p_coeff(j, b))
           * (-k) ** (j - 1) * np.exp(-0.5 * arg * arg))
    return float(out) if out.ndim == 0 else out


def gauss_hermite_norm(j: int, nodes: int = 200) -> float:
    """Gauss-Hermite quadrature of the phi_j normalization integral.

    Exact (up to roundoff) once nodes > j, since the integrand without
    the Gaussian weight is a polynomial of degree 2(j-1).
    """
    t, w = np.polynomial.hermite.hermgauss(nodes)
    p = _hermite_poly_part(j, t)
    return float(np.sum(w * p * p))


def gauss_hermite_gram(j_max: int, nodes: int = 200) -> np.ndarray:
    """Gram matrix of phi_1..phi_{j_max} under Gauss-Hermite quadrature."""
    t, w = np.polynomial.hermite.hermgauss(nodes)
    polys = np.vstack([_hermite_poly_part(j, t) for j in range(1, j_max + 1)])
    return (polys * w) @ polys.T
