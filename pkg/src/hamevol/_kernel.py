"""Compiled stepping kernel for ``H(t) = H0 + rho(r(t)) * |e><e|``.

This is the same Cash-Karp ``odeint``/``rkqs``/``rkck`` algorithm as
:mod:`hamevol.rk`, specialised to the neutrino Hamiltonian so that whole
solar trajectories (10^5-10^6 steps) run in compiled code. The generic
module stays the reference; the two are cross-checked in the test suite.

Failures are reported through a status code because the caller raises the
package exceptions with context the kernel does not have.
"""

import math

import numpy as np
from numba import njit

from .errors import (
    EvaluationError,
    MinimumStepError,
    StepBudgetExceeded,
    StepUnderflowError,
)
from .tableau import A, B, C, DC

SOLAR, EARTH, TABULATED = 0, 1, 2
# layout of the float parameter vector of a density profile
N0, LAMBDA, RADIUS, CORE, MANTLE, CORE_FRACTION = range(6)

OK, BUDGET, MINSTEP, UNDERFLOW, NONFINITE = range(5)

_A = np.array(A)
_B = np.array(B)
_C = np.array(C)
_DC = np.array(DC)


@njit(cache=True)
def density_at(kind, pars, tab_x, tab_y, r):
    """Electron density (N_A / cm^3) at radial distance ``r`` (1/eV)."""
    if kind == SOLAR:
        return pars[N0] * math.exp(-pars[LAMBDA] * r / pars[RADIUS])
    if kind == EARTH:
        if r <= pars[CORE_FRACTION] * pars[RADIUS]:
            return pars[CORE]
        return pars[MANTLE]
    return np.interp(r / pars[RADIUS], tab_x, tab_y)


@njit(cache=True)
def _fill(model, t, out):
    h0, rho_scale, kind, pars, tab_x, tab_y, crossing = model
    n = h0.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = h0[i, j]
    r = abs(t - pars[RADIUS]) if crossing else t
    out[0, 0] += rho_scale * density_at(kind, pars, tab_x, tab_y, r)


@njit(cache=True)
def _rhs(hm, y, out):
    n = y.size
    for i in range(n):
        acc = 0j
        for j in range(n):
            acc += hm[i, j] * y[j]
        out[i] = -1j * acc


@njit(cache=True)
def _rkck(y, dydx, t, h, model, k, ytmp, hm, yout, yerr):
    n = y.size
    for i in range(n):
        k[0, i] = dydx[i]
    for s in range(1, 6):
        for i in range(n):
            acc = 0j
            for m in range(s):
                acc += _B[s, m] * k[m, i]
            ytmp[i] = y[i] + h * acc
        _fill(model, t + _A[s] * h, hm)
        _rhs(hm, ytmp, k[s])
    for i in range(n):
        acc = 0j
        err = 0j
        for m in range(6):
            acc += _C[m] * k[m, i]
            err += _DC[m] * k[m, i]
        yout[i] = y[i] + h * acc
        yerr[i] = h * err


@njit(cache=True)
def _odeint(y, t1, t2, control, model):
    eps, h1, hmin, maxstp, safety, pgrow, pshrnk, errcon, tiny = control
    n = y.size
    k = np.empty((6, n), dtype=np.complex128)
    ytmp = np.empty(n, dtype=np.complex128)
    yout = np.empty(n, dtype=np.complex128)
    yerr = np.empty(n, dtype=np.complex128)
    dydx = np.empty(n, dtype=np.complex128)
    yscal = np.empty(n)
    hm = np.empty((n, n), dtype=np.complex128)
    t = t1
    h = h1
    nok = 0
    nbad = 0
    for _ in range(int(maxstp)):
        _fill(model, t, hm)
        _rhs(hm, y, dydx)
        for i in range(n):
            yscal[i] = abs(y[i]) + abs(h * dydx[i]) + tiny
        wanted = h
        last = (t + h - t2) * (t + h - t1) > 0.0
        if last:
            h = t2 - t
        htry = h
        # rkqs
        while True:
            _rkck(y, dydx, t, h, model, k, ytmp, hm, yout, yerr)
            errmax = 0.0
            for i in range(n):
                e = abs(yerr[i]) / yscal[i]
                if not e <= errmax:
                    errmax = e
            errmax /= eps
            if not math.isfinite(errmax):
                return y, t, h, nok, nbad, NONFINITE
            if errmax <= 1.0:
                break
            htemp = safety * h * errmax**pshrnk
            h = max(htemp, 0.1 * h) if h >= 0 else min(htemp, 0.1 * h)
            if t + h == t:
                return y, t, h, nok, nbad, UNDERFLOW
        if errmax > errcon:
            hnext = safety * h * errmax**pgrow
        else:
            hnext = 5.0 * h
        t = t + h
        for i in range(n):
            y[i] = yout[i]
        if h == htry:
            nok += 1
            if last:
                t = t2
        else:
            nbad += 1
        if (t - t2) * (t2 - t1) >= 0.0:
            # hand back the unclamped proposal so callers can chain intervals
            return y, t, wanted if last else hnext, nok, nbad, OK
        if abs(hnext) < hmin:
            return y, t, hnext, nok, nbad, MINSTEP
        h = hnext
    return y, t, h, nok, nbad, BUDGET


def integrate_model(y_start, t1, t2, control, model, h_start=None):
    """Integrate ``model`` from ``t1`` to ``t2``.

    ``model`` is a :class:`hamevol.physics.HamiltonianModel`. Returns
    ``(y_end, h_next, nok, nbad)``; ``h_start`` overrides ``control.h1`` so a
    caller can continue with the step size proposed by a previous interval.
    """
    y = np.array(y_start, dtype=np.complex128)
    if t2 == t1:
        return y, control.h1 if h_start is None else h_start, 0, 0
    h1 = control.h1 if h_start is None else h_start
    if np.sign(h1) != np.sign(t2 - t1):
        raise ValueError(f"initial step {h1} points away from t2 (t1={t1}, t2={t2})")
    ctrl = (
        float(control.eps),
        float(h1),
        float(control.hmin),
        float(control.maxstp),
        float(control.safety),
        float(control.pgrow),
        float(control.pshrnk),
        float(control.errcon),
        float(control.tiny),
    )
    y, t, h, nok, nbad, status = _odeint(y, float(t1), float(t2), ctrl, model.kernel_args())
    if status == OK:
        return y, h, nok, nbad
    if status == BUDGET:
        raise StepBudgetExceeded(f"too many steps (maxstp={control.maxstp}) before t={t2!r}")
    if status == MINSTEP:
        raise MinimumStepError(f"step size {abs(h)!r} below hmin={control.hmin} at t={t!r}")
    if status == UNDERFLOW:
        raise StepUnderflowError(f"stepsize underflow at t={t!r}")
    hm = model.matrix(t)
    bad = np.argwhere(~np.isfinite(hm))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise EvaluationError(f"non-finite Hamiltonian entry H[{i},{j}] at t={t!r}", t=t, i=i, j=j)
    raise EvaluationError(f"non-finite error estimate at t={t!r}", t=t)
