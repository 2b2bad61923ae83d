"""Independent oracle for Daubechies filters via spectral factorization.

Builds the Daubechies polynomial P(y) = sum_{k<p} C(p-1+k, k) y^k, maps its
roots to z-plane roots of the half-band factor, keeps the ones inside the
unit circle (minimum phase) and expands the resulting polynomial. Runs in
high precision with mpmath and prints C++ initializer rows.

Usage: python3 daubechies_oracle.py [max_order]
"""
import sys

import mpmath as mp

mp.mp.dps = 60


def daubechies(p):
    if p == 1:
        s = 1 / mp.sqrt(2)
        return [s, s]
    # P(y) with y = sin^2(w/2) = (2 - z - 1/z) / 4
    coeffs = [mp.binomial(p - 1 + k, k) for k in range(p)]
    roots_y = mp.polyroots(list(reversed(coeffs)), maxsteps=500, extraprec=200)
    zroots = []
    for y in roots_y:
        # z^2 - (2 - 4y) z + 1 = 0
        b = 2 - 4 * y
        disc = mp.sqrt(b * b - 4)
        z1 = (b + disc) / 2
        z2 = (b - disc) / 2
        zroots.append(z1 if abs(z1) < 1 else z2)
    # (1 + z)^p * prod (z - z_k)
    poly = [mp.mpc(1)]
    for _ in range(p):
        poly = _mul(poly, [mp.mpc(1), mp.mpc(1)])
    for zr in zroots:
        poly = _mul(poly, [-zr, mp.mpc(1)])
    h = [mp.re(c) for c in poly]
    scale = mp.sqrt(2) / sum(h)
    h = [c * scale for c in h]
    # orient so the largest taps come first (standard min-phase ordering)
    return list(reversed(h)) if abs(h[0]) < abs(h[-1]) else h


def _mul(a, b):
    out = [mp.mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def residuals(h, p):
    n = len(h)
    s = abs(sum(h) - mp.sqrt(2))
    orth = max(abs(sum(h[k] * h[k + 2 * m] for k in range(n - 2 * m)) - (1 if m == 0 else 0))
               for m in range(n // 2))
    mom = max(abs(sum((-1) ** k * mp.mpf(k) ** m * h[k] for k in range(n))) for m in range(p))
    return s, orth, mom


if __name__ == "__main__":
    top = int(sys.argv[1]) if len(sys.argv) > 1 else 10
    for p in range(1, top + 1):
        h = daubechies(p)
        r = residuals(h, p)
        assert max(r) < mp.mpf("1e-40"), (p, r)
        vals = ", ".join(mp.nstr(c, 20, strip_zeros=False) for c in h)
        print(f"    {{{vals}}},")
