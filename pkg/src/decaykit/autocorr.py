"""Autocorrelation of the density of states and its cosine-transform pair.

    P(t) = int_0^inf R(y) cos(yt) dy,    R(y) = (2/pi) int_0^inf P(t) cos(yt) dt,

with R(y) = 2 int_0^inf rho(x) rho(x + y) dx.  Sampled transforms
interpolate the samples with a cubic spline and integrate spline x cosine
on Gauss panels no longer than one kernel period; the part beyond the last
sample is added analytically (1/y^2 tail for R, power-law tail for P).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import sici

from . import quadrature as quad
from .errors import InsufficientSampling, QuadratureNonconvergence, WeightsNotNormalized
from .special import complex_power, upper_incomplete_gamma

AUTOCORR_TOL = 1e-9
TAIL_TOL = 1e-3
P_HORIZON = 1e-6


@dataclass(frozen=True)
class AutocorrCurve:
    y: np.ndarray
    R: np.ndarray


def autocorrelation(dos, y, tol=AUTOCORR_TOL):
    """R(y) = 2 int_0^inf rho(x) rho(x + y) dx."""
    y = float(y)
    if y < 0:
        raise ValueError("autocorrelation is evaluated for y >= 0")
    poles = dos.pole_set.poles
    centers = [p.sigma for p in poles] + [p.sigma - y for p in poles]
    halfwidths = [0.5 * p.omega for p in poles] * 2
    e_max = dos.energy_cutoff
    cap = 4.0 / dos.form_factor.b if dos.exponential else None
    origin = (0.5 * y,) if y > 0 else ()
    br = quad.graded_breaks(0.0, e_max, centers, halfwidths, max_len=cap, origin_scales=origin)
    first = 0.5 * float(np.min(np.abs(dos.pole_set.z)))
    if y > 0:
        first = min(first, 0.5 * y)
    if br[1] > first:
        br = np.insert(br, 1, first)
    power = 2.0 * dos.nu if y == 0 else dos.nu
    value, err = quad.integrate(lambda x: dos(x) * dos(x + y), br, left_power=power)
    if err > tol * max(1.0, abs(value)):
        raise QuadratureNonconvergence(f"autocorrelation at y={y:g}: error estimate {err:.2e}", err)
    tail = 0.0
    if not dos.exponential:
        # rho ~ d E^{nu-2} beyond the cut-off when the finiteness condition holds
        d = dos._tail_coefficients(0)[1]
        a = 2.0 * dos.nu - 4.0
        tail = -d * d * e_max ** (a + 1.0) / (a + 1.0)
    return float(2.0 * (value + tail))


def autocorr_curve(dos, y):
    y = np.asarray(y, dtype=float)
    return AutocorrCurve(y, np.array([autocorrelation(dos, v) for v in y]))


def default_y_grid(dos, count=400):
    """Energy offsets graded toward y = 0 on the scale of the narrowest width."""
    w = dos.pole_set.dominant.omega
    y_max = dos.energy_cutoff
    return np.concatenate([[0.0], np.geomspace(0.02 * w, y_max, count - 1)])


def _spline_cosine(x, f, t):
    """int_{x0}^{x_end} spline(f) cos(t x) dx on panels of at most one period."""
    spline = CubicSpline(x, f, bc_type="not-a-knot")
    br = quad.cap_length(x, t)
    value, _ = quad.integrate(lambda s: spline(s) * np.cos(t * s), br, order=8, check_order=None)
    return value


def wk_forward(ac, t):
    """P(t) reconstructed from sampled R(y); tail fitted as A / y^2."""
    y, R = np.asarray(ac.y, dtype=float), np.asarray(ac.R, dtype=float)
    t = abs(float(t))
    body = _spline_cosine(y, R, t)
    Y = y[-1]
    A = R[-1] * Y * Y
    if abs(A / Y) > TAIL_TOL:
        raise InsufficientSampling(f"autocorrelation tail beyond y={Y:g} is {A / Y:.2e}; sample further")
    if t == 0:
        tail = A / Y
    else:
        si, _ = sici(t * Y)
        tail = A * (math.cos(t * Y) / Y - t * (0.5 * math.pi - si))
    return float(body + tail)


def _power_tail(t_end, P_end, y, exponent):
    """int_T^inf K t^{-m} cos(yt) dt with K fitted so the tail matches P(T)."""
    K = P_end * t_end**exponent
    if y == 0:
        return K * t_end ** (1.0 - exponent) / (exponent - 1.0)
    val = complex_power(-1j * y, exponent - 1.0) * upper_incomplete_gamma(1.0 - exponent, -1j * y * t_end)
    return K * val.real


def _check_horizon(P):
    if P[-1] > P_HORIZON:
        raise InsufficientSampling(f"P = {P[-1]:.2e} at the last sample; extend the horizon until P < {P_HORIZON}")


def wk_inverse(t, P, y, exponent=3.0):
    """R(y) = (2/pi) int P cos(yt) dt from samples of P; tail K t^{-exponent}."""
    t = np.asarray(t, dtype=float)
    P = np.asarray(P, dtype=float)
    _check_horizon(P)
    y = abs(float(y))
    body = _spline_cosine(t, P, y)
    return float(2.0 / math.pi * (body + _power_tail(t[-1], P[-1], y, exponent)))


def lifetime_fleming(t, P, exponent=3.0):
    """Integral of P over [0, inf), tail appended as K t^{-exponent}."""
    t = np.asarray(t, dtype=float)
    P = np.asarray(P, dtype=float)
    _check_horizon(P)
    return float(_spline_cosine(t, P, 0.0) + _power_tail(t[-1], P[-1], 0.0, exponent))


def fleming_report(t, P, exponent=3.0):
    """Lifetime int P dt next to R(0) = (2/pi) int P dt; they differ by 2/pi."""
    life = lifetime_fleming(t, P, exponent)
    return {"lifetime": life, "autocorr_at_zero": 2.0 / math.pi * life, "ratio": 2.0 / math.pi}


def discrete_spectrum(levels, t):
    """P(t) for a discrete spectrum and R(y) as a list of (offset, weight) deltas."""
    E = np.array([float(e) for e, _ in levels])
    w = np.array([float(v) for _, v in levels])
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise WeightsNotNormalized(f"weights must be >= 0 and sum to 1, got sum {w.sum()!r}")
    P = float(np.sum(w * w))
    terms = [(0.0, P)]
    for n in range(1, len(E)):
        for m in range(n):
            dE = E[n] - E[m]
            P += 2.0 * w[n] * w[m] * math.cos(dE * t)
            terms.append((float(dE), float(2.0 * w[n] * w[m])))
    return P, terms


def lorentzian_autocorr(y, omega, residue):
    """8 pi omega |R|^2 / (y^2 + omega^2), the transform of a single P_e."""
    y = np.asarray(y, dtype=float)
    return 8.0 * math.pi * omega * abs(residue) ** 2 / (y * y + omega * omega)


def multi_pole_autocorr(dos, y):
    """8 pi Im sum_{s,s'} R_s R_{s'}^* / (y + z_s - z_{s'}^*), the transform of P_e."""
    y = np.asarray(y, dtype=float)
    z = dos.pole_set.z
    R = dos.residues
    total = np.zeros(y.shape, dtype=complex)
    for zs, rs in zip(z, R):
        for zp, rp in zip(z, R):
            total += rs * np.conj(rp) / (y + zs - np.conj(zp))
    return 8.0 * math.pi * total.imag
