r"""Integer-order Bessel functions of the first and second kind.

:math:`J_m(x)` comes from Miller's downward recurrence normalised with
:math:`1 = J_0 + 2\sum_k J_{2k}`.  :math:`Y_0` and :math:`Y_1` are built from
the same sequence through the Neumann series

.. math::
    \tfrac{\pi}{2} Y_0(x) = (\ln\tfrac{x}{2} + \gamma) J_0(x)
        - 2 \sum_{k\ge1} (-1)^k \frac{J_{2k}(x)}{k}

    \tfrac{\pi}{2} Y_1(x) = (\ln\tfrac{x}{2} + \gamma - 1) J_1(x) - \frac{J_0(x)}{x}
        + \sum_{j\ge1} (-1)^{j+1} \frac{2j+1}{j(j+1)} J_{2j+1}(x)

(the second is the term-by-term derivative of the first), and higher orders
follow from the upward recurrence, which is stable for Y.

Everything is vectorised over ``x``; the order is a scalar integer.
"""

from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_BIG = 1e250
_SMALL = 1e-250


def _start_order(nmax: int, xmax: float) -> int:
    top = max(float(nmax), xmax)
    n = int(top + 30 + 6.0 * top ** (1.0 / 3.0))
    return n + (n % 2)


def j_sequence(nmax: int, x) -> np.ndarray:
    """J_0(x) ... J_N(x) for some N >= nmax, shape ``(N + 1,) + x.shape``.

    ``x`` must be > 0.  Orders above ``nmax`` are returned too because the
    Neumann series for Y needs them.
    """
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    if np.any(flat <= 0):
        raise ValueError("j_sequence requires x > 0")
    n_start = _start_order(nmax, float(flat.max()))
    out = np.zeros((n_start + 1, flat.size))
    j_next = np.zeros_like(flat)   # J_{k+1}
    j_cur = np.full_like(flat, 1e-30)  # J_k, arbitrary seed
    norm = np.zeros_like(flat)
    out[n_start] = j_cur
    # |J_{k-1}| <= (2k/x + 1) max(|J_k|, |J_{k+1}|): skip the overflow guard
    # when even the worst-case growth cannot reach _BIG
    k_all = np.arange(1, n_start + 1)
    growth = np.sum(np.log1p(2.0 * k_all / flat.min()))
    guard = growth - 30 * math.log(10) > math.log(_BIG)
    for k in range(n_start, 0, -1):
        j_prev = (2.0 * k / flat) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        out[k - 1] = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if guard:
            big = np.abs(j_cur) > _BIG
            if np.any(big):
                j_cur[big] *= _SMALL
                j_next[big] *= _SMALL
                norm[big] *= _SMALL
                out[k - 1:, big] *= _SMALL
    norm += out[0]
    out /= norm
    return out.reshape((n_start + 1,) + x.shape)


def _y01(seq: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n_top = seq.shape[0] - 1
    log_term = np.log(x / 2.0) + EULER_GAMMA
    k = np.arange(1, n_top // 2 + 1)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    coeff = (sign / k).reshape((-1,) + (1,) * x.ndim)
    y0 = log_term * seq[0] - 2.0 * np.sum(coeff * seq[2:2 * k[-1] + 1:2], axis=0)

    j = np.arange(1, (n_top - 1) // 2 + 1)
    sign = np.where(j % 2 == 1, 1.0, -1.0)
    coeff = (sign * (2 * j + 1) / (j * (j + 1))).reshape((-1,) + (1,) * x.ndim)
    y1 = ((log_term - 1.0) * seq[1] - seq[0] / x
          + np.sum(coeff * seq[3:2 * j[-1] + 2:2], axis=0))
    return y0 * (2.0 / math.pi), y1 * (2.0 / math.pi)


def _check_order(order) -> int:
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    return int(order)


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x) for x >= 0."""
    m = _check_order(order)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j requires x >= 0")
    result = np.zeros(x.shape)
    pos = x > 0
    if np.any(pos):
        result[pos] = j_sequence(m, x[pos])[m]
    result[~pos] = 1.0 if m == 0 else 0.0
    return result if result.ndim else float(result)


def bessel_y(order: int, x):
    """Bessel function of the second kind Y_order(x) for x > 0."""
    m = _check_order(order)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_y is only defined for x > 0")
    return _y_from_seq(m, j_sequence(1, x), x)


def _y_from_seq(m: int, seq: np.ndarray, x: np.ndarray):
    y_prev, y_cur = _y01(seq, x)
    if m == 0:
        y = y_prev
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, m):
                y_prev, y_cur = y_cur, (2.0 * k / x) * y_cur - y_prev
        y = y_cur
    return y if np.ndim(y) else float(y)


def bessel_jjp(order: int, x) -> tuple[np.ndarray, np.ndarray]:
    """J_m and J'_m from one recurrence (x > 0)."""
    m = _check_order(order)
    x = np.asarray(x, dtype=float)
    seq = j_sequence(m + 1, x)
    return seq[m], m / x * seq[m] - seq[m + 1]


def bessel_jy(order: int, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """J_m, J'_m, Y_m, Y'_m at once, sharing one downward recurrence.

    Used by the resonance solver, which needs all four at every wavelength.
    """
    m = _check_order(order)
    x = np.asarray(x, dtype=float)
    seq = j_sequence(m + 1, x)
    jm, jm1 = seq[m], seq[m + 1]
    jp = m / x * jm - jm1
    y_prev, y_cur = _y01(seq, x)
    if m == 0:
        ym, ym1 = y_prev, y_cur
    else:
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, m + 1):
                y_prev, y_cur = y_cur, (2.0 * k / x) * y_cur - y_prev
        ym, ym1 = y_prev, y_cur
    yp = m / x * ym - ym1
    return jm, jp, ym, yp


def bessel_jp(order: int, x):
    """Derivative J'_order(x)."""
    m = _check_order(order)
    if m == 0:
        return -np.asarray(bessel_j(1, x)) if np.ndim(x) else -bessel_j(1, x)
    return 0.5 * (np.asarray(bessel_j(m - 1, x)) - bessel_j(m + 1, x))


def bessel_yp(order: int, x):
    """Derivative Y'_order(x)."""
    m = _check_order(order)
    if m == 0:
        return -np.asarray(bessel_y(1, x)) if np.ndim(x) else -bessel_y(1, x)
    return 0.5 * (np.asarray(bessel_y(m - 1, x)) - bessel_y(m + 1, x))
