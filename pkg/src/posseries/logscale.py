"""Iterated logarithms and the De Morgan-Bertrand integrands built from them.

L_0(x) = x and L_k(x) = ln L_{k-1}(x). The MB(k, s) term is

    1 / x^s                                        for k = 0
    1 / (x L_1(x) ... L_{k-1}(x) L_k(x)^s)         for k >= 1

and it is positive and decreasing on [n_k, oo) whenever s > 0.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

# Beyond this the start index no longer fits comfortably in int64.
MAX_K = 4


def iterated_log(k: int, x):
    """L_k(x); raises DomainError when an intermediate iterate is <= 0."""
    if k < 0:
        raise DomainError("k must be >= 0")
    arr = np.asarray(x, dtype=float)
    y = arr
    for level in range(k):
        if np.any(y <= 0):
            raise DomainError(f"L_{level}(x) <= 0, so L_{level + 1}(x) is undefined")
        y = np.log(y)
    return float(y) if np.ndim(y) == 0 else y


def log_chain(k: int, x: np.ndarray) -> list[np.ndarray]:
    """[L_1(x), ..., L_k(x)] without domain checks."""
    out, y = [], np.asarray(x, dtype=float)
    for _ in range(k):
        y = np.log(y)
        out.append(y)
    return out


def mb_start(k: int) -> int:
    """Smallest integer n with L_k(n) > 0 (1, 2, 3, 16, 3814280 for k = 0..4)."""
    if k < 0:
        raise DomainError("k must be >= 0")
    if k == 0:
        return 1
    if k > MAX_K:
        raise DomainError(f"k = {k} needs a start index beyond int64")
    threshold = 1.0  # L_k(n) > 0  <=>  n > exp^(k-1)(1)
    for _ in range(k - 1):
        threshold = math.exp(threshold)
    n = int(math.floor(threshold)) + 1
    while n > 1 and _positive_chain(k, n - 1):
        n -= 1
    while not _positive_chain(k, n):
        n += 1
    return n


def _positive_chain(k: int, n: float) -> bool:
    y = float(n)
    for _ in range(k):
        if y <= 0:
            return False
        y = math.log(y)
    return y > 0


def mb_integrand(k: int, s: float, x):
    """The MB(k, s) term as a function of a real argument."""
    x = np.asarray(x, dtype=float)
    if k == 0:
        out = x**-s
    else:
        chain = log_chain(k, x)
        denom = x.copy() if x.ndim else np.array(x)
        for L in chain[:-1]:
            denom = denom * L
        out = 1.0 / (denom * chain[-1] ** s)
    return float(out) if np.ndim(out) == 0 else out


def mb_log_derivative(k: int, s: float, x):
    """f'(x) / f(x) for the MB(k, s) integrand."""
    x = np.asarray(x, dtype=float)
    if k == 0:
        return -s / x
    chain = log_chain(k, x)
    out = -1.0 / x
    prod = x.copy() if x.ndim else np.array(x)
    for j, L in enumerate(chain, start=1):
        prod = prod * L
        out = out - (s if j == k else 1.0) / prod
    return float(out) if np.ndim(out) == 0 else out
