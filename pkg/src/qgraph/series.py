"""Truncated power series in one variable.

Coefficients live in a 1-D numpy array; with ``exact=True`` the dtype is
object and the entries are ``fractions.Fraction``, so small-order identities
can be asserted without rounding.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def _zeros(n, exact):
    if exact:
        return np.array([Fraction(0)] * n, dtype=object)
    return np.zeros(n, dtype=complex)


def to_exact(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(10 ** 12) if isinstance(x, float) else Fraction(x)


def constant(c, order, exact=False):
    s = _zeros(order + 1, exact)
    s[0] = to_exact(c) if exact else c
    return s


def mul(a, b):
    n = len(a)
    exact = a.dtype == object
    out = _zeros(n, exact)
    for i in range(n):
        if a[i] == 0:
            continue
        out[i:] = out[i:] + a[i] * b[: n - i]
    return out


def inv(a):
    """1/a for a[0] != 0."""
    n = len(a)
    exact = a.dtype == object
    out = _zeros(n, exact)
    out[0] = (Fraction(1) if exact else 1.0) / a[0]
    for k in range(1, n):
        acc = a[1 : k + 1][::-1].dot(out[:k]) if k else 0
        out[k] = -acc / a[0]
    return out


def binomial_power(c, step, e, order, exact=False):
    """(1 - c u^step)^e for any integer e (negative exponents included)."""
    out = _zeros(order + 1, exact)
    coef = Fraction(1) if exact else 1.0
    j = 0
    while j * step <= order:
        out[j * step] = coef * ((-c) ** j if j else 1)
        coef = coef * (e - j) / (j + 1)
        j += 1
        if e >= 0 and j > e:
            break
    return out


def det(mat):
    """Determinant of a square matrix of series whose constant-term matrix is invertible.

    ``mat[i][j]`` is a coefficient array.  Gaussian elimination with pivots
    chosen by the size of their constant term.
    """
    n = len(mat)
    if n == 0:
        return None
    A = [[np.array(mat[i][j]) for j in range(n)] for i in range(n)]
    order = len(A[0][0]) - 1
    exact = A[0][0].dtype == object
    result = constant(1, order, exact)
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(A[r][c][0]))
        if A[p][c][0] == 0:
            raise ZeroDivisionError("series matrix is singular at u = 0")
        if p != c:
            A[c], A[p] = A[p], A[c]
            result = -result
        piv = A[c][c]
        result = mul(result, piv)
        pinv = inv(piv)
        for r in range(c + 1, n):
            f = mul(A[r][c], pinv)
            if not np.any(f != 0):
                continue
            for j in range(c, n):
                A[r][j] = A[r][j] - mul(f, A[c][j])
    return result


def charpoly_series(K, order, exact=False):
    """Coefficients of det(1 - u K) up to u^order from Newton's identities on tr(K^j)."""
    n = K.shape[0]
    if exact:
        Km = np.array([[to_exact(x) for x in row] for row in K], dtype=object)
        P = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    else:
        Km = np.asarray(K, dtype=complex)
        P = np.eye(n, dtype=complex)
    top = min(order, n)
    p = [None]
    for _ in range(top):
        P = P.dot(Km)
        p.append(np.trace(P))
    e = [Fraction(1) if exact else 1.0]
    for j in range(1, top + 1):
        s = sum(((-1) ** (i - 1)) * e[j - i] * p[i] for i in range(1, j + 1))
        e.append(s / j)
    out = _zeros(order + 1, exact)
    for j in range(top + 1):
        out[j] = ((-1) ** j) * e[j]
    return out
