"""Brute-force propagators used to check the Runge-Kutta pipeline.

Nothing here shares code with the steppers. Eigendecompositions use a cyclic
Jacobi sweep written out in numpy (no LAPACK), vectorised over a stack of
matrices so that path-ordered products with 10^5 slices stay cheap.
"""

import math

import numpy as np

_MAX_SWEEPS = 50


def _jacobi_eigh(stack):
    """Eigen-decompose a stack of Hermitian matrices, shape ``(m, n, n)``.

    Returns real eigenvalues ``(m, n)`` and unitary eigenvectors ``(m, n, n)``
    (columns), so that ``a = v @ diag(w) @ v^dagger``.
    """
    a = np.array(stack, dtype=np.complex128)
    m, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), (m, n, n)).copy()
    scale = np.max(np.abs(a), axis=(1, 2))
    scale[scale == 0] = 1.0
    for _ in range(_MAX_SWEEPS):
        off = np.abs(a.copy())
        off[:, np.arange(n), np.arange(n)] = 0.0
        if np.all(np.max(off, axis=(1, 2)) <= 1e-17 * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                r = np.abs(apq)
                phase = np.where(r > 0, apq / np.where(r > 0, r, 1.0), 1.0)
                theta = 0.5 * np.arctan2(2.0 * r, a[:, p, p].real - a[:, q, q].real)
                theta = np.where(theta > math.pi / 4, theta - math.pi / 2, theta)
                c = np.cos(theta)
                s = np.sin(theta)
                # J = diag(1, conj(phase)) @ [[c, -s], [s, c]] acting on (p, q)
                jpp = c
                jpq = -s
                jqp = s * np.conj(phase)
                jqq = c * np.conj(phase)
                # a <- a @ J
                colp = a[:, :, p].copy()
                colq = a[:, :, q]
                a[:, :, p] = colp * jpp[:, None] + colq * jqp[:, None]
                a[:, :, q] = colp * jpq[:, None] + colq * jqq[:, None]
                # a <- J^dagger @ a
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :]
                a[:, p, :] = rowp * np.conj(jpp)[:, None] + rowq * np.conj(jqp)[:, None]
                a[:, q, :] = rowp * np.conj(jpq)[:, None] + rowq * np.conj(jqq)[:, None]
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                # v <- v @ J
                colp = v[:, :, p].copy()
                colq = v[:, :, q]
                v[:, :, p] = colp * jpp[:, None] + colq * jqp[:, None]
                v[:, :, q] = colp * jpq[:, None] + colq * jqq[:, None]
    w = np.real(np.diagonal(a, axis1=1, axis2=2))
    return w, v


def eigh(h):
    """Eigenvalues and eigenvectors of one Hermitian matrix."""
    w, v = _jacobi_eigh(np.asarray(h)[None])
    return w[0], v[0]


def _polish(u):
    """One Newton-Schulz step towards the nearest unitary matrix.

    The rotations leave each factor unitary only to a few ulps, and those
    errors add up linearly over 10^5 slices; this squares them away.
    """
    n = u.shape[-1]
    gram = np.conj(np.swapaxes(u, -1, -2)) @ u
    return u @ (1.5 * np.eye(n) - 0.5 * gram)


def _exp_stack(stack, dt):
    w, v = _jacobi_eigh(stack)
    phases = np.exp(-1j * w * dt)
    return _polish((v * phases[:, None, :]) @ np.conj(np.swapaxes(v, 1, 2)))


def hermitian_exponential(h, dt):
    """``exp(-i H dt)`` for a Hermitian matrix ``H`` (eV) and ``dt`` (1/eV)."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T)) >= 1e-12:
        raise ValueError("matrix is not Hermitian")
    return _exp_stack(h[None], dt)[0]


def _ordered_product(stack):
    """``stack[-1] @ ... @ stack[1] @ stack[0]`` by pairwise reduction."""
    while len(stack) > 1:
        if len(stack) % 2:
            tail = stack[-1:]
            stack = stack[:-1]
        else:
            tail = None
        stack = stack[1::2] @ stack[0::2]
        if tail is not None:
            stack = np.concatenate([stack, tail])
    return stack[0]


def path_ordered_propagator(model, t1, t2, n_slices, chunk=20000):
    """Midpoint-rule approximation of the path-ordered exponential.

    ``model`` must provide ``matrices(ts)`` returning a stack of ``H(t)``.
    Later slices multiply from the left.
    """
    if n_slices <= 0:
        raise ValueError(f"n_slices must be positive, got {n_slices}")
    dt = (t2 - t1) / n_slices
    mids = t1 + (np.arange(n_slices) + 0.5) * dt
    partial = []
    for start in range(0, n_slices, chunk):
        hs = model.matrices(mids[start : start + chunk])
        partial.append(_ordered_product(_exp_stack(hs, dt)))
    return _polish(_ordered_product(np.array(partial)))


def two_flavor_vacuum_analytic(theta, dm2, energy, length):
    """``P_ee = 1 - sin^2(2 theta) sin^2(dm2 L / 4E)``."""
    if not energy > 0:
        raise ValueError(f"energy must be positive, got {energy}")
    return 1.0 - math.sin(2.0 * theta) ** 2 * math.sin(dm2 * length / (4.0 * energy)) ** 2
