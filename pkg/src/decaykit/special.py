"""Branch-aware complex special functions.

All functions take and return Python scalars (``float``/``complex``) and
use the principal branch with the cut along the negative real axis.  The
incomplete gamma function additionally accepts a ``sheet`` index so callers
whose argument winds past the cut can continue it analytically.
"""

import cmath
import math

from scipy import special as _sp

from .errors import BranchCutViolation, NonfiniteResult, PoleOfGamma, ZeroBase

EULER_GAMMA = 0.57721566490153286061

_EPS = 1e-16
_TINY = 1e-300
_MAXITER = 20000

# |z| below this, or z this close to the negative real axis (|z| + Re z),
# goes to the power series; everything else to the continued fraction.
_SERIES_RADIUS = 1.5
_SERIES_CUT_DISTANCE = 4.0
# beyond this the series terms overflow; the fraction converges even near the cut
_SERIES_MAX_MODULUS = 60.0


def _is_nonpositive_integer(x):
    return x <= 0 and x == math.floor(x)


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex ``z``."""
    z = complex(z)
    if z.imag == 0 and _is_nonpositive_integer(z.real):
        raise PoleOfGamma(f"Gamma has a pole at z = {z.real:g}")
    return complex(_sp.loggamma(z))


def principal_arg(z):
    """Arg z in (-pi, pi]; a signed zero imaginary part does not flip the sign."""
    z = complex(z)
    if z.imag == 0:
        return math.pi if z.real < 0 else 0.0
    return math.atan2(z.imag, z.real)


def complex_power(z, nu):
    """Principal z**nu = exp(nu (log|z| + i Arg z)) with Arg z in (-pi, pi]."""
    z = complex(z)
    if z == 0:
        if nu <= 0:
            raise ZeroBase("0 ** nu is undefined for nu <= 0")
        return 0j
    phase = nu * principal_arg(z)
    mag = abs(z) ** nu
    return complex(mag * math.cos(phase), mag * math.sin(phase))


def _log_principal(z):
    return complex(math.log(abs(z)), principal_arg(z))


def _series_scaled(a, z):
    """exp(z) * Gamma(a, z) from Gamma(a) - z^a sum (-z)^k / (k! (a + k))."""
    term = 1 + 0j
    total = 1.0 / a + 0j
    k = 0
    while True:
        k += 1
        term *= -z / k
        delta = term / (a + k)
        total += delta
        if k > abs(z) and abs(delta) <= _EPS * abs(total):
            break
        if k > _MAXITER:
            raise NonfiniteResult(f"incomplete gamma series did not converge (a={a}, z={z})")
    return cmath.exp(z) * math.gamma(a) - cmath.exp(z + a * _log_principal(z)) * total


def _e1_scaled(z):
    """exp(z) * E1(z) = exp(z) * Gamma(0, z) by its power series."""
    term = 1 + 0j
    total = 0j
    k = 0
    while True:
        k += 1
        term *= -z / k
        delta = term / k
        total += delta
        if k > abs(z) and abs(delta) <= _EPS * max(abs(total), _TINY):
            break
        if k > _MAXITER:
            raise NonfiniteResult(f"E1 series did not converge (z={z})")
    return cmath.exp(z) * (-EULER_GAMMA - _log_principal(z) - total)


def _cf_scaled(a, z):
    """exp(z) * Gamma(a, z) by the Legendre continued fraction (modified Lentz)."""
    b = z + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / (b if abs(b) > _TINY else _TINY)
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return cmath.exp(a * _log_principal(z)) * h
    raise NonfiniteResult(f"incomplete gamma continued fraction did not converge (a={a}, z={z})")


def _principal_scaled(a, z):
    r = abs(z)
    use_series = r <= _SERIES_RADIUS or (r + z.real <= _SERIES_CUT_DISTANCE and r <= _SERIES_MAX_MODULUS)
    if not use_series:
        return _cf_scaled(a, z)
    if not _is_nonpositive_integer(a):
        return _series_scaled(a, z)
    # non-positive integer order: E1 and downward recurrence
    # Gamma(a, z) = (Gamma(a + 1, z) - z^a e^{-z}) / a
    g = _e1_scaled(z)
    order = 0
    while order > a:
        order -= 1
        g = (g - complex_power(z, order)) / order
    return g


def _sheet_constant(a, sheet):
    """(1 - exp(2 pi i k a)) Gamma(a) for k = sheet, finite at integer a."""
    if sheet == 1:
        return -2j * math.pi * cmath.exp(1j * math.pi * a) * _sp.rgamma(1.0 - a)
    return 2j * math.pi * cmath.exp(-1j * math.pi * a) * _sp.rgamma(1.0 - a)


def upper_incomplete_gamma_scaled(a, z, sheet=0):
    """exp(z) * Gamma(a, z e^{2 pi i sheet}) with z on the principal sheet.

    The scaling keeps the value representable when Re z is large and
    negative, which is the regime of the Fourier-transformed densities.
    """
    a = float(a)
    z = complex(z)
    if sheet not in (-1, 0, 1):
        raise ValueError("only sheets -1, 0, 1 are supported")
    if z == 0:
        if a > 0:
            return complex(math.gamma(a))
        raise PoleOfGamma(f"Gamma(a, 0) diverges for a = {a:g} <= 0")
    if z.imag == 0 and z.real < 0:
        raise BranchCutViolation(f"z = {z.real:g} lies on the branch cut")
    value = _principal_scaled(a, z)
    if sheet:
        value = cmath.exp(2j * math.pi * sheet * a) * value + _sheet_constant(a, sheet) * cmath.exp(z)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NonfiniteResult(f"Gamma({a}, {z}) is not finite")
    return value


def upper_incomplete_gamma(a, z, sheet=0):
    """Upper incomplete gamma Gamma(a, z) for real ``a`` and complex ``z``.

    Power series (E1 plus downward recurrence for non-positive integer
    ``a``) near the origin and near the negative real axis, Legendre
    continued fraction elsewhere.  ``sheet=+1/-1`` evaluates the analytic
    continuation to ``z e^{+-2 pi i}``.

    >>> abs(upper_incomplete_gamma(1.0, 1.0) - math.exp(-1)) < 1e-15
    True
    """
    z = complex(z)
    scaled = upper_incomplete_gamma_scaled(a, z, sheet)
    if z == 0:
        return scaled
    try:
        value = cmath.exp(-z) * scaled
    except OverflowError as exc:
        raise NonfiniteResult(f"Gamma({a}, {z}) overflows") from exc
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NonfiniteResult(f"Gamma({a}, {z}) overflows")
    return value
