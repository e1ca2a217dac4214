"""Pure-Python versions of the compiled kernels (same signatures)."""
import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import splu

_CHUNK = 1 << 22


def phase_sum(x0, dx, n, ks, coef):
    ks = np.ascontiguousarray(ks, dtype=float)
    coef = np.ascontiguousarray(coef, dtype=complex)
    xs = x0 + dx * np.arange(n)
    out = np.zeros(n, dtype=complex)
    rows = max(1, _CHUNK // max(len(ks), 1))
    for start in range(0, n, rows):
        block = np.exp(1j * np.outer(xs[start:start + rows], ks))
        out[start:start + rows] = (block * coef).sum(axis=1)
    return out


def sample_transform(x0, dx, vals, ks):
    vals = np.ascontiguousarray(vals, dtype=complex)
    ks = np.ascontiguousarray(ks, dtype=float)
    xs = x0 + dx * np.arange(len(vals))
    out = np.empty(len(ks), dtype=complex)
    rows = max(1, _CHUNK // max(len(xs), 1))
    for start in range(0, len(ks), rows):
        block = np.exp(-1j * np.outer(ks[start:start + rows], xs))
        out[start:start + rows] = (block * vals).sum(axis=1)
    return out


def cn_propagate(psi, nsteps, a_diag, a_off, b_diag, b_off):
    n = len(psi)
    off = np.full(n - 1, a_off, dtype=complex)
    lu = splu(diags([off, np.asarray(a_diag, complex), off], [-1, 0, 1], format="csc"))
    u = np.array(psi, dtype=complex, copy=True)
    b_diag = np.asarray(b_diag, complex)
    r = np.empty(n, dtype=complex)
    for _ in range(nsteps):
        r[:] = b_diag * u
        r[1:] += b_off * u[:-1]
        r[:-1] += b_off * u[1:]
        u = lu.solve(r)
    return u
