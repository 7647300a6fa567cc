#!/usr/bin/env python3
"""Independent reference values for the frozen test constants.

Shares no code with the C++ library: scipy for Bessel functions, dense numpy
finite elements for the crossing segments, sympy for closed forms.
"""
import numpy as np
import scipy.linalg
import scipy.special
import sympy as sp


def bessel_values():
    print("# Bessel")
    for n, k in [(0, 1), (1, 1), (1, 2), (2, 1), (20, 20)]:
        root = scipy.special.jnp_zeros(n, k)[-1] if n > 0 else scipy.special.jn_zeros(1, k)[-1]
        print(f"jprime_root({n},{k}) = {root:.17g}")
    r11 = scipy.special.jnp_zeros(1, 1)[0]
    print(f"J1(j'11) = {scipy.special.jv(1, r11):.17g}")
    print(f"1/j'11^2 = {1 / r11**2:.17g}")
    for n, x in [(0, 0.0), (0, 1.0), (1, 2.5), (5, 10.0), (3, 30.0), (20, 50.0), (10, 99.0)]:
        print(f"J_{n}({x}) = {scipy.special.jv(n, x):.17g}")


def interval_eigen(n_el=256):
    # Dense P1 generalized eigenproblem on [-1, 1].
    h = 2.0 / n_el
    n = n_el + 1
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    for e in range(n_el):
        idx = [e, e + 1]
        K[np.ix_(idx, idx)] += np.array([[1, -1], [-1, 1]]) / h
        M[np.ix_(idx, idx)] += np.array([[2, 1], [1, 2]]) * h / 6
    w = scipy.linalg.eigh(K, M, eigvals_only=True)
    print("# interval Neumann P1, h = 2/%d" % n_el)
    print(f"lambda2 = {w[1]:.17g}  (pi^2/4 = {np.pi**2 / 4:.17g})")
    print(f"C = {1 / w[1]:.17g}  (4/pi^2 = {4 / np.pi**2:.17g})")


def crossing_segments(n_el):
    # Two segments of length 2 crossing at their midpoints; DOF n_el/2 shared.
    h = 2.0 / n_el
    m = n_el + 1
    n = 2 * m - 1
    mid = n_el // 2
    dofs_a = list(range(m))
    dofs_b = [m + i if i < mid else (mid if i == mid else m + i - 1) for i in range(m)]
    K = np.zeros((n, n))
    M = np.zeros((n, n))
    b = np.zeros(n)
    x = np.linspace(-1, 1, m)
    g, gw = np.polynomial.legendre.leggauss(2)
    for dofs, f in ((dofs_a, lambda s: s), (dofs_b, lambda s: 0 * s)):
        for e in range(n_el):
            idx = [dofs[e], dofs[e + 1]]
            K[np.ix_(idx, idx)] += np.array([[1, -1], [-1, 1]]) / h
            M[np.ix_(idx, idx)] += np.array([[2, 1], [1, 2]]) * h / 6
            xs = x[e] + (g + 1) * h / 2
            phi = np.array([(x[e + 1] - xs) / h, (xs - x[e]) / h])
            b[idx] += phi @ (gw * f(xs)) * h / 2
    one = np.ones(n)
    # Bordered system enforcing zero mean.
    A = np.block([[K, (M @ one)[:, None]], [(M @ one)[None, :], np.zeros((1, 1))]])
    sol = np.linalg.solve(A, np.concatenate([b, [0.0]]))[:n]
    q, qw = np.polynomial.legendre.leggauss(4)
    err = 0.0
    for dofs, exact in ((dofs_a, lambda s: -s**3 / 6 + s / 2), (dofs_b, lambda s: 0 * s)):
        u = sol[dofs]
        for e in range(n_el):
            xs = x[e] + (q + 1) * h / 2
            uh = u[e] + (u[e + 1] - u[e]) * (xs - x[e]) / h
            err += np.sum(qw * (uh - exact(xs)) ** 2) * h / 2
    return np.sqrt(err)


def crossing_segments_table():
    print("# crossing segments, f = y on E1: L2 error of P1 vs -y^3/6 + y/2")
    prev = None
    for n_el in (64, 128, 256, 512):
        e = crossing_segments(n_el)
        ratio = "" if prev is None else f"  ratio {prev / e:.6f}"
        print(f"N={n_el}: {e:.17g}{ratio}")
        prev = e


def closed_forms():
    y = sp.symbols("y")
    u = -y**3 / 6 + y / 2
    print("# closed form of -u'' = y, u'(+-1) = 0, zero total mean with u = 0 on E2")
    print("residual:", sp.simplify(-sp.diff(u, y, 2) - y), " u'(+-1):", sp.diff(u, y).subs(y, 1), sp.diff(u, y).subs(y, -1))
    print("integral over E1:", sp.integrate(u, (y, -1, 1)), " energy of y:", sp.integrate(1, (y, -1, 1)))
    printed = -sp.Rational(21, 1080) - y**4 / 12 + y**3 / 6 + y**2 / 6 - y / 2
    print("# printed formula")
    print("u'(-1), u'(1):", sp.diff(printed, y).subs(y, -1), sp.diff(printed, y).subs(y, 1))
    print("u(0):", printed.subs(y, 0), " integral:", sp.integrate(printed, (y, -1, 1)))
    print("-u'':", sp.expand(-sp.diff(printed, y, 2)))
    r = sp.symbols("r", positive=True)
    w = sp.cos(sp.pi * r**2)
    lap = sp.simplify(sp.diff(r * sp.diff(w, r), r) / r)
    print("# Laplacian of cos(pi r^2):", lap)
    print("integral of Laplacian over unit disc:", sp.simplify(sp.integrate(lap * 2 * sp.pi * r, (r, 0, 1))))
    print("dw/dr at r = 1:", sp.diff(w, r).subs(r, 1))


if __name__ == "__main__":
    bessel_values()
    interval_eigen()
    crossing_segments_table()
    closed_forms()
