import math

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


def golden_section_max(f, a, b, tol=1e-5):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    The endpoints are compared too, so a monotone ``f`` returns the better
    endpoint rather than a point ``tol`` inside it.
    """
    a, b = min(a, b), max(a, b)
    lo, hi = a, b
    fa, fb = f(a), f(b)
    h = b - a
    if h <= tol:
        return (a, fa) if fa >= fb else (b, fb)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    # first maximum wins ties, so interior points beat the endpoints
    fx, x = max([(yc, c), (yd, d), (fa, lo), (fb, hi)], key=lambda p: p[0])
    return x, fx


def bisect_sign_change(f, lo, hi, xtol=1e-4, maxiter=40, f_lo=None, f_hi=None):
    """Locate a sign change of ``f`` on ``[lo, hi]`` by bisection.

    ``f_lo``/``f_hi`` may be passed when already known. Raises ``ValueError``
    if the endpoints do not bracket a sign change.
    """
    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError("endpoints do not bracket a sign change")
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return 0.5 * (lo + hi)
