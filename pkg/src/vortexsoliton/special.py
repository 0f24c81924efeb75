"""Bessel functions of the first kind by power series, and their first zeros by Newton."""
from __future__ import annotations

import math


def bessel_j(n: int, x: float) -> float:
    """``J_n(x)`` from its power series; accurate for moderate ``x`` (say ``x < 20``)."""
    n = abs(int(n))
    half = 0.5 * x
    term = half ** n / math.factorial(n)
    terms = [term]
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        terms.append(term)
        if abs(term) < 1e-18 * max(1.0, abs(terms[0])) and k > half:
            break
    return math.fsum(terms)


def bessel_j_prime(n: int, x: float) -> float:
    if n == 0:
        return -bessel_j(1, x)
    return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))


def bessel_j_zero(n: int, tol: float = 1e-15, max_iter: int = 50) -> float:
    """First positive zero of ``J_n`` by Newton iteration."""
    n = abs(int(n))
    if n == 0:
        x = 2.4
    else:
        c = n ** (1.0 / 3.0)
        x = n + 1.8557571 * c + 1.033150 / c
    for _ in range(max_iter):
        step = bessel_j(n, x) / bessel_j_prime(n, x)
        x -= step
        if abs(step) <= tol * x:
            break
    return x
