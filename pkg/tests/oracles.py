"""Independent dense constructions used as test oracles."""
from functools import reduce

import numpy as np
import scipy.linalg as sl

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def site_op(op, i, n):
    return reduce(np.kron, [op if s == i else I2 for s in range(n)])


def two_site(a, i, b, j, n):
    return site_op(a, i, n) @ site_op(b, j, n)


def tfi_dense(n, J, lam):
    H = sum(-J * two_site(X, i, X, (i + 1) % n, n) for i in range(n))
    return H - lam * sum(site_op(Z, i, n) for i in range(n))


def ci_dense(n, J, h, lam):
    H = sum(-J * two_site(X, i, X, i + 1, n) for i in range(n - 1))
    H = H - h * sum(site_op(X, i, n) for i in range(n))
    return H - lam * sum(site_op(Z, i, n) for i in range(n))


def lri_dense(n, J, lam, alpha):
    H = -lam * sum(site_op(Z, i, n) for i in range(n))
    for i in range(n):
        for j in range(i + 1, n):
            H = H - J / (j - i) ** alpha * two_site(X, i, X, j, n)
    return H


def product_dense(theta, phi, n):
    v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return reduce(np.kron, [v] * n)


def quadrature_generator(H, dH, t, steps=4000):
    """``int_0^t e^{iH tau} dH e^{-iH tau} dtau`` by Simpson's rule on expm."""
    if steps % 2:
        steps += 1
    h = t / steps
    U = sl.expm(1j * H * h)
    cur = np.eye(H.shape[0], dtype=complex)
    total = np.zeros_like(cur)
    for s in range(steps + 1):
        w = 1 if s in (0, steps) else (4 if s % 2 else 2)
        total += w * (cur @ dH @ cur.conj().T)
        cur = U @ cur
    return total * h / 3


def variance(op, psi):
    m = np.vdot(psi, op @ psi)
    return float((np.vdot(op @ psi, op @ psi) - m * m.conjugate()).real)
