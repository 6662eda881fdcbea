"""Scalar root finding used by the quantization condition and the flux map."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError, DomainError

MAX_ITER = 64


def safeguarded_newton(
    f: Callable[[float], float],
    a: float,
    b: float,
    fprime: Optional[Callable[[float], float]] = None,
    xtol: float = 1e-15,
    ftol: float = 0.0,
    max_iter: int = MAX_ITER,
) -> float:
    """Find a root of ``f`` in the bracket ``[a, b]``.

    Newton steps are taken when they stay inside the current bracket and
    otherwise replaced by a bisection step, so convergence is guaranteed
    for any continuous ``f`` with ``f(a) * f(b) <= 0``.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise DomainError(f"no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")
    lo, hi, flo = a, b, fa
    x = 0.5 * (lo + hi)
    history = []
    for _ in range(max_iter):
        fx = f(x)
        history.append(fx)
        if fx == 0.0 or abs(fx) <= ftol:
            return x
        if np.sign(fx) == np.sign(flo):
            lo, flo = x, fx
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return x
        step_ok = False
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and np.isfinite(d):
                xn = x - fx / d
                if lo < xn < hi:
                    x, step_ok = xn, True
        if not step_ok:
            x = 0.5 * (lo + hi)
    if hi - lo <= 1e3 * xtol * max(1.0, abs(x)):
        return x
    raise ConvergenceError(f"root not converged on [{a}, {b}]", history)


def sign_change_brackets(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> list:
    """Return sub-intervals of an ``n``-point grid where vectorized ``f`` changes sign."""
    x = np.linspace(a, b, n)
    y = f(x)
    s = np.sign(y)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    brackets = []
    for i in idx:
        if s[i] == 0 and i > 0:
            continue
        brackets.append((float(x[i]), float(x[i + 1])))
    return brackets
