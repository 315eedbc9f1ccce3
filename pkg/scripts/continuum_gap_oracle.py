"""Regenerate the frozen continuum gap oracle used by the fiber tests.

For the sharp step W = w_minus + (w_plus - w_minus) H(x - x0) the fiber
equation -u'' + (x - k)^2 u + W u = E u is a Weber equation on each side
of the jump, so the band energy is the root of a log-derivative matching
condition between two parabolic cylinder functions.  Bisection at 60
decimal digits gives the edge gap (b(2j-1) + w_plus) - E_j(k) to far
more digits than the discretized solver can see; the values printed
here are the ones frozen into tests/test_fiber.py.

Run:  python3 scripts/continuum_gap_oracle.py
"""

import mpmath as mp

B = 1.0
W_MINUS, W_PLUS, X0 = 0.0, 1.0, 0.0
J = 1
K_LIST = (4, 5, 6)


def log_derivative_mismatch(e, k):
    """u'_-/u_- - u'_+/u_+ at the jump; zero at a band energy.

    Left of x0 the potential floor is w_minus and the decaying direction
    is x -> -inf; right of x0 it is w_plus with decay toward +inf.  Both
    branches are U(a, z) with z = sqrt(2)(x - k) up to reflection.
    """
    s2 = mp.sqrt(2)
    z0 = s2 * (X0 - k)

    def ratio(a, z, sign):
        # d/dx log U(a, sign * z(x)); sign flips the decay direction
        u = mp.pcfu(a, sign * z)
        du = mp.diff(lambda t: mp.pcfu(a, t), sign * z)
        return sign * s2 * du / u

    a_minus = -(e - W_MINUS) / 2
    a_plus = -(e - W_PLUS) / 2
    return ratio(a_minus, z0, -1) - ratio(a_plus, z0, 1)


def band_energy(k, digits=60):
    """E_J(k) by bisection between the two Landau pinning levels."""
    with mp.workdps(digits):
        lo = mp.mpf(B * (2 * J - 1) + W_MINUS) + mp.mpf("1e-30")
        hi = mp.mpf(B * (2 * J - 1) + W_PLUS) - mp.mpf("1e-30")
        f_lo = log_derivative_mismatch(lo, k)
        for _ in range(digits * 4):
            mid = (lo + hi) / 2
            f_mid = log_derivative_mismatch(mid, k)
            if mp.sign(f_mid) == mp.sign(f_lo):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
            if hi - lo < mp.mpf(10) ** (-digits + 5):
                break
        return (lo + hi) / 2


def main():
    edge = B * (2 * J - 1) + W_PLUS
    print(f"step ({W_MINUS}, {W_PLUS}, x0={X0}), b={B}, j={J}")
    print(f"{'k':>3}  {'edge gap  (2 - E_1(k))':>28}")
    with mp.workdps(60):
        for k in K_LIST:
            gap = mp.mpf(edge) - band_energy(k)
            print(f"{k:>3}  {mp.nstr(gap, 19):>28}")


if __name__ == "__main__":
    main()
