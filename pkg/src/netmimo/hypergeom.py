"""Gauss hypergeometric function for the ``c = b + 1`` family on ``z <= 0``.

For ``y = -z >= 0`` and ``b > -1`` (``b != 0``)::

    2F1(a, b; 1 + b; -y) = (1 + y)**-a + a * y**-b * B(y / (1 + y); 1 + b, a - b)

with ``B(x; p, q)`` the (unregularised) lower incomplete beta function. The
identity follows from the Euler integral after subtracting the constant term
and integrating by parts; it stays valid for negative ``b``, where the plain
Euler integral diverges. Near ``y = 0`` the power series of ``2F1 - 1`` is
used instead to avoid cancellation.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate, special

from .errors import DomainError

_SERIES_CUTOFF = 0.1
_SERIES_MAXTERMS = 400
_SERIES_X = 1e-10


def incomplete_beta(x, p, q, xc=None):
    """Lower incomplete beta ``int_0^x t**(p-1) (1-t)**(q-1) dt`` for ``0 <= x < 1``.

    Vectorised for ``p, q > 0``; the complement form is used for ``x > 1/2``.
    Pass ``xc = 1 - x`` when it is known more accurately than ``x`` itself.
    A scalar quadrature fallback covers ``q <= 0``.
    """
    if xc is None:
        xc = 1.0 - np.asarray(x, dtype=float)
    x, xc, p, q = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, xc, p, q)))
    if np.any(p <= 0):
        raise DomainError("incomplete beta needs p > 0")
    if np.any(q <= 0):
        flat = [
            integrate.quad(lambda t, pp=pp, qq=qq: t ** (pp - 1) * (1 - t) ** (qq - 1), 0.0, xx,
                           epsabs=0.0, epsrel=1e-13, limit=200)[0]
            for xx, pp, qq in zip(x.ravel(), p.ravel(), q.ravel())
        ]
        return np.reshape(flat, x.shape)
    lower = x <= 0.5
    reg = np.where(lower, special.betainc(p, q, np.where(lower, x, 0.0)),
                   special.betaincc(q, p, np.where(lower, 1.0, xc)))
    out = reg * special.beta(p, q)
    # betainc loses relative accuracy for tiny and subnormal x; two series terms are exact there.
    tiny = x < _SERIES_X
    if np.any(tiny):
        xs = np.where(tiny, x, 0.0)
        series = xs ** p / p * (1.0 + p * (1.0 - q) * xs / (p + 1.0))
        out = np.where(tiny, series, out)
    return out


def _check_pattern(b, c):
    if not np.isclose(c, 1.0 + b, rtol=0.0, atol=1e-12):
        raise DomainError(f"only c = b + 1 is supported, got b={b}, c={c}")
    if not b > -1.0:
        raise DomainError(f"b must exceed -1, got {b}")


def hyp2f1m1(a, b: float, y):
    """``2F1(a, b; 1 + b; -y) - 1`` for ``y >= 0``, accurate when the result is small.

    ``a`` and ``y`` broadcast; ``b`` is a scalar in ``(-1, 0) U (0, inf)``.
    """
    a, y = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(y, dtype=float))
    if np.any(y < 0):
        raise DomainError("argument must satisfy z <= 0")
    if b == 0:
        return np.zeros(y.shape)
    out = np.empty(y.shape)
    small = y < _SERIES_CUTOFF
    if np.any(small):
        out[small] = _series_m1(a[small], b, y[small])
    big = ~small
    if np.any(big):
        yb, ab = y[big], a[big]
        ib = incomplete_beta(yb / (1.0 + yb), 1.0 + b, ab - b, xc=1.0 / (1.0 + yb))
        # (1+y)^-a - 1 via expm1 keeps precision when a*log1p(y) is small.
        out[big] = np.expm1(-ab * np.log1p(yb)) + ab * yb ** (-b) * ib
    return out


def _series_m1(a, b, y):
    # b * sum_{n>=1} (a)_n (-y)^n / (n! (b + n))
    term = np.ones_like(y)
    acc = np.zeros_like(y)
    for n in range(1, _SERIES_MAXTERMS + 1):
        term = term * (a + n - 1) * (-y) / n
        inc = term / (b + n)
        acc = acc + inc
        if np.all(np.abs(inc) <= 1e-17 * np.abs(acc)):
            break
    return b * acc


def hyp2f1(a, b, c, z):
    """Gauss hypergeometric ``2F1(a, b; c; z)`` restricted to ``c = b + 1``, ``z <= 0``.

    Raises :class:`DomainError` for any other parameter pattern.

    >>> round(float(hyp2f1(1.0, 1.0, 2.0, -1.0)), 12)
    0.69314718056
    """
    _check_pattern(b, c)
    z = np.asarray(z, dtype=float)
    if np.any(z > 0):
        raise DomainError("only z <= 0 is supported")
    out = 1.0 + hyp2f1m1(a, b, -z)
    return out if out.ndim else float(out)
