"""Independent reference implementations used only by the tests.

Nothing here imports the sector machinery: operators are built from
Kronecker products of 2x2 matrices, eigenvalues from a cyclic Jacobi
sweep, dynamics from a dense matrix exponential.
"""

import numpy as np
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
# basis order (|down>, |up>) so that bit value 1 means up
SZ = np.array([[-1, 0], [0, 1]], dtype=complex) / 2


def site_op(op, site, n_sites):
    """``op`` on ``site`` of an n-site chain; site b is bit b of the state index."""
    return np.kron(np.kron(np.eye(2 ** (n_sites - 1 - site)), op), np.eye(2**site))


def dense_ladder(L, J_par=1.0, J_perp=1.0, lam=0.0, scale=1.0):
    """Dense H0 + lam V from spin operators; sites (l, k) -> 2(l-1)+(k-1)."""
    n = 2 * L
    S = [[site_op(o, b, n) for o in (SX, SY, SZ)] for b in range(n)]

    def heis(a, b):
        return sum(S[a][i] @ S[b][i] for i in range(3))

    def zz(a, b):
        return S[a][2] @ S[b][2]

    bit = lambda l, k: 2 * (l - 1) + (k - 1)  # noqa: E731
    nxt = lambda l: l % L + 1  # noqa: E731
    h = np.zeros((2**n, 2**n), dtype=complex)
    v = np.zeros_like(h)
    for l in range(1, L + 1):
        for k in (1, 2):
            h += scale * J_par * heis(bit(l, k), bit(nxt(l), k))
        h += scale * J_perp * heis(bit(l, 1), bit(l, 2))
        v += scale * (zz(bit(l, 1), bit(nxt(l), 2)) + zz(bit(l, 2), bit(nxt(l), 1)))
    return h + lam * v, v


def dense_rung_sz(L, l):
    n = 2 * L
    return site_op(SZ, 2 * (l - 1), n) + site_op(SZ, 2 * (l - 1) + 1, n)


def jacobi_eigenvalues(a, tol=1e-13, max_sweeps=100):
    """Cyclic Jacobi rotations on a real symmetric matrix."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off < tol * max(1.0, np.abs(a).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t**2 + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def hermitian_eigenvalues_jacobi(h):
    """Eigenvalues of complex Hermitian ``h`` via its real symmetric embedding."""
    re, im = h.real, h.imag
    big = np.block([[re, -im], [im, re]])
    ev = jacobi_eigenvalues(big)
    return ev[::2]  # each eigenvalue appears twice


def dense_expectation(h, rho, a, times):
    """tr[exp(-iHt) rho exp(iHt) A] by dense matrix exponentials."""
    out = []
    for t in times:
        u = expm(-1j * h * t)
        out.append(np.trace(u @ rho @ u.conj().T @ a))
    return np.array(out)
