"""Adaptive Cash-Karp Runge-Kutta integration of ``i dy/dt = H(t) y``.

The Hamiltonian is any callable ``hamiltonian(t, i, j) -> complex`` returning
one matrix element (eV) at position ``t`` (1/eV), with 0-based indices.
Objects that also provide ``matrix(t) -> ndarray`` are used through that
method inside the steppers, which avoids ``N**2`` Python calls per stage.

The driver structure is the classic ``odeint``/``rkqs``/``rkck`` split:

* :func:`cash_karp_step` advances one step and returns the embedded error;
* :func:`quality_step` retries that step until the scaled error is below
  ``eps`` and proposes the next step size;
* :func:`integrate` drives :func:`quality_step` across an interval.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    EvaluationError,
    MinimumStepError,
    StepBudgetExceeded,
    StepUnderflowError,
)
from .tableau import A, B, C, DC


@dataclass(frozen=True)
class StepControl:
    """Adaptive step parameters.

    ``errcon`` equals ``(5 / safety) ** (1 / pgrow)``: below it the growth
    factor ``safety * err_max ** pgrow`` would exceed 5, so growth is capped.
    """

    eps: float = 1e-8
    h1: float = 1e-5
    hmin: float = 1e-7
    maxstp: int = 1_000_000
    safety: float = 0.9
    pgrow: float = -0.2
    pshrnk: float = -0.25
    errcon: float = 1.89e-4
    tiny: float = 1e-10

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.h1 == 0 or not np.isfinite(self.h1):
            raise ValueError(f"h1 must be finite and nonzero, got {self.h1}")
        if not self.hmin >= 0:
            raise ValueError(f"hmin must be >= 0, got {self.hmin}")
        if self.maxstp < 1:
            raise ValueError(f"maxstp must be >= 1, got {self.maxstp}")


@dataclass(frozen=True)
class IntegrationStats:
    nok: int = 0
    nbad: int = 0


def matrix_function(hamiltonian, n):
    """Return ``t -> H(t)`` as an ``(n, n)`` complex array."""
    matrix = getattr(hamiltonian, "matrix", None)
    if matrix is not None:
        return matrix

    def build(t):
        out = np.empty((n, n), dtype=np.complex128)
        for i in range(n):
            for j in range(n):
                out[i, j] = hamiltonian(t, i, j)
        return out

    return build


def _as_state(y):
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.size < 1:
        raise ValueError(f"state must be a non-empty 1-d vector, got shape {y.shape}")
    return y


def _locate_nonfinite(hmat, t, stage):
    h = np.asarray(hmat(t))
    bad = np.argwhere(~np.isfinite(h))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise EvaluationError(
            f"non-finite Hamiltonian entry H[{i},{j}] at t={t!r} (stage {stage})",
            t=t, i=i, j=j, stage=stage,
        )


def derivative(t, y, hamiltonian):
    """Right-hand side ``dy_i = -i sum_j H_ij(t) y_j``, one element at a time."""
    y = _as_state(y)
    n = y.size
    dy = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0j
        for j in range(n):
            hij = complex(hamiltonian(t, i, j))
            if not (np.isfinite(hij.real) and np.isfinite(hij.imag)):
                raise EvaluationError(
                    f"non-finite Hamiltonian entry H[{i},{j}] at t={t!r}", t=t, i=i, j=j
                )
            acc += hij * y[j]
        dy[i] = -1j * acc
    return dy


def _rkck(y, dydx, t, h, hmat):
    k = np.empty((6, y.size), dtype=np.complex128)
    k[0] = dydx
    for s in range(1, 6):
        ts = t + A[s] * h
        ytmp = y + h * (B[s, :s] @ k[:s])
        # non-finite stages are reported below with their position
        with np.errstate(invalid="ignore", over="ignore"):
            k[s] = -1j * (hmat(ts) @ ytmp)
        if not np.all(np.isfinite(k[s])):
            _locate_nonfinite(hmat, ts, s + 1)
            raise EvaluationError(f"non-finite value in stage {s + 1} at t={ts!r}", t=ts, stage=s + 1)
    yout = y + h * (C @ k)
    yerr = h * (DC @ k)
    return yout, yerr


def cash_karp_step(y, dydx, t, h, hamiltonian):
    """One fifth-order step with its embedded error estimate.

    Returns ``(y_out, y_err)`` where ``y_err`` is the difference between the
    fifth- and fourth-order solutions.
    """
    y = _as_state(y)
    dydx = np.asarray(dydx, dtype=np.complex128)
    return _rkck(y, dydx, t, h, matrix_function(hamiltonian, y.size))


def fixed_step(y, dydx, t, h, hamiltonian):
    """Fifth-order Cash-Karp advance with the error estimate discarded."""
    return cash_karp_step(y, dydx, t, h, hamiltonian)[0]


def _rkqs(y, dydx, t, htry, eps, yscal, hmat, control):
    h = htry
    while True:
        ytemp, yerr = _rkck(y, dydx, t, h, hmat)
        errmax = float(np.max(np.abs(yerr) / yscal)) / eps
        if not np.isfinite(errmax):
            raise EvaluationError(f"non-finite error estimate at t={t!r}", t=t)
        if errmax <= 1.0:
            break
        htemp = control.safety * h * errmax**control.pshrnk
        h = max(htemp, 0.1 * h) if h >= 0 else min(htemp, 0.1 * h)
        if t + h == t:
            raise StepUnderflowError(f"stepsize underflow at t={t!r}")
    if errmax > control.errcon:
        hnext = control.safety * h * errmax**control.pgrow
    else:
        hnext = 5.0 * h
    return ytemp, t + h, h, hnext


def quality_step(y, dydx, t, h_try, eps, y_scale, hamiltonian, control=StepControl()):
    """Error-controlled step.

    Returns ``(y_new, t_new, h_did, h_next)``. The step is retried with a
    smaller size until ``max_i |y_err_i| / y_scale_i <= eps``.
    """
    y = _as_state(y)
    y_scale = np.asarray(y_scale, dtype=float)
    if np.any(y_scale <= 0):
        raise ValueError("y_scale components must be strictly positive")
    return _rkqs(
        y,
        np.asarray(dydx, dtype=np.complex128),
        t,
        h_try,
        eps,
        y_scale,
        matrix_function(hamiltonian, y.size),
        control,
    )


def integrate(y_start, t1, t2, control, hamiltonian):
    """Integrate from ``t1`` to ``t2`` with adaptive step control.

    Returns ``(y_end, IntegrationStats)``; ``y_start`` is not modified. The
    sign of ``control.h1`` must match the direction of integration.
    """
    y = _as_state(y_start).copy()
    if not np.all(np.isfinite(y)):
        raise ValueError("y_start must be finite")
    if t2 == t1:
        return y, IntegrationStats()
    if np.sign(control.h1) != np.sign(t2 - t1):
        raise ValueError(
            f"h1={control.h1} points away from t2 (t1={t1}, t2={t2})"
        )
    hmat = matrix_function(hamiltonian, y.size)
    t = t1
    h = control.h1
    nok = nbad = 0
    for _ in range(control.maxstp):
        dydx = -1j * (hmat(t) @ y)
        if not np.all(np.isfinite(dydx)):
            _locate_nonfinite(hmat, t, 1)
            raise EvaluationError(f"non-finite derivative at t={t!r}", t=t, stage=1)
        yscal = np.abs(y) + np.abs(h * dydx) + control.tiny
        last = (t + h - t2) * (t + h - t1) > 0.0
        if last:
            h = t2 - t
        y, t, hdid, hnext = _rkqs(y, dydx, t, h, control.eps, yscal, hmat, control)
        if hdid == h:
            nok += 1
            if last:
                t = t2
        else:
            nbad += 1
        if (t - t2) * (t2 - t1) >= 0.0:
            return y, IntegrationStats(nok, nbad)
        if abs(hnext) < control.hmin:
            raise MinimumStepError(
                f"step size {abs(hnext)!r} below hmin={control.hmin} at t={t!r}"
            )
        h = hnext
    raise StepBudgetExceeded(f"too many steps (maxstp={control.maxstp}) before t={t2!r}")
