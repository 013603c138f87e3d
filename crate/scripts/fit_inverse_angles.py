"""Fit phase angles for the scaled inverse 1/(kappa x) used by the QSVT inversion path.

Two stages:
  1. an odd Chebyshev polynomial p of degree d minimizing max |p(x) - scale/(kappa x)|
     on [1/kappa, 1] subject to |p| <= 0.999 on [0, 1] (convex, solved with cvxpy);
  2. phases in the Wx convention, started from (pi/4, 0, ..., 0, pi/4), fitted so that
     Re <0|e^{i psi_0 Z} W(x) e^{i psi_1 Z} ... W(x) e^{i psi_d Z}|0> = p(x) on Chebyshev nodes.

The Wx phases are then mapped to the reflection convention realized by the Rust
builder: <0| e^{i phi_1 Z} R(x) e^{i phi_2 Z} R(x) ... e^{i phi_d Z} R(x) |0>, with
R(x) = [[x, sqrt(1-x^2)], [sqrt(1-x^2), -x]] = -i e^{i pi/4 Z} W(x) e^{i pi/4 Z}.

usage: python3 fit_inverse_angles.py KAPPA EPSILON DEGREE SCALE OUT
"""
import sys

import cvxpy as cp
import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import least_squares


def block(phis, x):
    """Reflection-convention response, the model the Rust builder realizes."""
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1 - x * x, 0, None))
    a = np.ones_like(x, dtype=complex)
    b = np.zeros_like(x, dtype=complex)
    for phi in phis:
        a, b = a * np.exp(1j * phi), b * np.exp(-1j * phi)
        a, b = a * x + b * s, a * s - b * x
    return a


def wx_response(psi, x):
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1 - x * x, 0, None))
    a = np.exp(1j * psi[0]) * np.ones_like(x, dtype=complex)
    b = np.zeros_like(a)
    for p in psi[1:]:
        a, b = a * x + 1j * s * b, 1j * s * a + x * b
        a, b = a * np.exp(1j * p), b * np.exp(-1j * p)
    return a


def target_polynomial(d, kappa, scale):
    fit_x = np.linspace(1 / kappa, 1, 400)
    all_x = np.linspace(0, 1, 800)
    odd = list(range(1, d + 1, 2))
    basis = lambda xs: np.stack([cheb.chebval(xs, np.eye(d + 1)[k]) for k in odd], 1)
    c = cp.Variable(len(odd))
    t = cp.Variable()
    cp.Problem(
        cp.Minimize(t),
        [cp.abs(basis(fit_x) @ c - scale / (kappa * fit_x)) <= t, cp.abs(basis(all_x) @ c) <= 0.999],
    ).solve()
    coeffs = np.zeros(d + 1)
    coeffs[odd] = c.value
    return coeffs


def wx_phases(coeffs, d):
    nodes = np.cos((2 * np.arange(1, 2 * d + 2) - 1) * np.pi / (4 * d + 4))
    target = cheb.chebval(nodes, coeffs)
    psi0 = np.zeros(d + 1)
    psi0[0] = psi0[-1] = np.pi / 4
    r = least_squares(lambda p: wx_response(p, nodes).real - target, psi0, method="lm",
                      xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200000)
    return r.x


def to_reflection(psi, d):
    phi = np.empty(d)
    # the end phases only contribute a global factor to <0|.|0>; absorb it in phi_1
    phi[0] = psi[0] + psi[d] + d * np.pi / 2 - np.pi / 2
    phi[1:] = psi[1:d] - np.pi / 2
    return (phi + np.pi) % (2 * np.pi) - np.pi


def main():
    kappa, eps, d, scale, out = (float(sys.argv[1]), float(sys.argv[2]),
                                 int(sys.argv[3]), float(sys.argv[4]), sys.argv[5])
    phis = to_reflection(wx_phases(target_polynomial(d, kappa, scale), d), d)
    grid = np.linspace(1 / kappa, 1, 101)
    dev = np.max(np.abs(block(phis, grid).real / scale - 1 / (kappa * grid)))
    print(f"max deviation on grid: {dev:.6f}")
    if dev > eps:
        sys.exit("fit did not reach the requested accuracy")
    with open(out, "w") as f:
        f.write(f"# kappa={kappa:g} epsilon={eps:g} degree={d} scale={scale:g}\n")
        for p in phis:
            f.write(f"{float(p)!r}\n")


if __name__ == "__main__":
    main()
