"""Free Dirac resolvent kernels: generic route, 3-d closed form, zero limit.

Evaluates G_0(z; x, y) for the massless Dirac operator, compares the generic
Hankel-built kernel against the closed 3-d exponential form, follows the
kernel into the z -> 0 limit, and prints the exact rational coefficients of
the odd-dimension small-z expansion.
"""

import numpy as np

from diracshift.clifford import build_clifford
from diracshift.green import (
    green0,
    green0_limit0,
    green0_many,
    odd_dim_coeffs,
    riesz_gamma,
)

rng = np.random.default_rng(11)

print("== generic vs closed-form route in three dimensions ==")
rep = build_clifford(3)
x = np.array([0.3, -0.4, 0.9])
y = np.array([-0.2, 0.5, 0.1])
z = 0.8 + 0.6j
g_generic = green0(rep, z, x, y, route="generic")
g_closed = green0(rep, z, x, y, route="closed")
print(f"z = {z},  |x-y| = {np.linalg.norm(x - y):.4f}")
print("route agreement:", np.abs(g_generic - g_closed).max())

print()
print("== approach to the zero-energy kernel ==")
limit = green0_limit0(rep, x, y)
for eps in (1e-1, 1e-3, 1e-5, 1e-7):
    g = green0(rep, 1j * eps, x, y)
    print(f"z = {eps:.0e} i:  ||G0(z) - G0(0)|| = {np.abs(g - limit).max():.3e}")
print(f"largest entry of the limit kernel: {np.abs(limit).max():.6f}")

print()
print("== batch evaluation over many separations ==")
diffs = rng.standard_normal((5, 3))
batch = green0_many(rep, z, diffs)
single = np.stack([green0(rep, z, d, np.zeros(3)) for d in diffs])
print("batch shape:", batch.shape)
print("batch vs single-point loop:", np.abs(batch - single).max())

print()
print("== exact expansion coefficients in odd dimensions ==")
for n in (3, 5, 7):
    coeffs = odd_dim_coeffs(n)
    zeros = [j for j in range(1, n - 3, 2) if coeffs.d[j] == 0]
    print(f"n={n}: d = {[str(c) for c in coeffs.d[:4]]} ...  vanishing odd d_j at j={zeros}")

print()
print("== Riesz-potential normalization ==")
# gamma(alpha) gamma(beta) / gamma(alpha+beta) controls kernel composition
a, b = 0.8, 0.8
lhs = riesz_gamma(a, 2) * riesz_gamma(b, 2) / riesz_gamma(a + b, 2)
print(f"gamma({a}) gamma({b}) / gamma({a + b}) at n=2: {lhs:.12g}")
