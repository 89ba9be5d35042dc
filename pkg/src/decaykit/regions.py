"""Critical times, time regions and modulating functions of P(n).

Time is measured in oscillations n = tau / (4 pi x_d) of the dominant
pole.  Region formulas follow from the large-n background amplitude

    A_ne / A_e = e^{2 pi x_d n} e^{2 pi i n} / (C n^{nu+1}),

with C the transition constant.  Everything is dimensionless (sigma_d = 1).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from . import quadrature as quad
from .dos import narrow_resonance
from .errors import (
    DegenerateDenominator,
    NegativeVariance,
    NoIntersection,
    QuadratureNonconvergence,
    SinglePole,
)
from .moments import variance
from .special import complex_power

ROOT_XTOL = 1e-12
TABLE1_X = tuple(10.0**k for k in range(-12, 0))


# small-to-intermediate transition

def _f(tau, alpha):
    return (1.0 - (tau / alpha) ** 2) * math.exp(tau)


def critical_time_intersection(alpha, R2):
    """Roots of (1 - (tau/alpha)^2) e^tau = R2 on [0, alpha], in increasing order.

    The count follows from the maximum f_+ = 2 tau_+ e^{tau_+} / alpha^2 at
    tau_+ = sqrt(1 + alpha^2) - 1: none above f_+, the tangency point at
    f_+, two roots for 1 < R2 < f_+ and one for R2 <= 1.
    """
    if not (alpha > 0 and R2 > 0):
        raise ValueError("alpha and R2 must be positive")
    tau_p = math.sqrt(1.0 + alpha * alpha) - 1.0
    f_p = 2.0 * tau_p * math.exp(tau_p) / (alpha * alpha)
    g = lambda tau: _f(tau, alpha) - R2
    xtol = ROOT_XTOL * max(alpha, 1e-300)
    if R2 > f_p * (1.0 + 1e-14):
        return []
    if abs(R2 - f_p) <= 1e-14 * f_p:
        return [tau_p]
    roots = []
    if R2 > 1.0:
        roots.append(brentq(g, 0.0, tau_p, xtol=xtol, rtol=1e-15))
    roots.append(brentq(g, tau_p, alpha, xtol=xtol, rtol=1e-15))
    return roots


def intersection_root_count(alpha, R2):
    tau_p = math.sqrt(1.0 + alpha * alpha) - 1.0
    f_p = 2.0 * tau_p * math.exp(tau_p) / (alpha * alpha)
    if R2 > f_p:
        return 0
    if R2 == f_p or R2 <= 1.0:
        return 1
    return 2


def critical_time_first_oscillation(x_d):
    """tau_cs = 4 pi x_d, i.e. n = 1, independent of the form factor."""
    return 4.0 * math.pi * x_d


def ghirardi_critical_time(variance, omega_d, sigma_d=1.0):
    """(tau_G, n_G) with tau_G = omega_d^2 / variance = alpha^2."""
    if not variance > 0:
        raise NegativeVariance(f"variance {variance:.3g} is not positive")
    tau = omega_d**2 / variance
    x_d = 0.5 * omega_d / sigma_d
    return tau, tau / (4.0 * math.pi * x_d)


# intermediate-to-large transition

@dataclass(frozen=True)
class TransitionConstant:
    C: complex

    @property
    def modulus(self):
        return abs(self.C)

    @property
    def phase(self):
        return math.atan2(self.C.imag, self.C.real)


def transition_constant(res, residue, g0=None):
    """C = (2 pi)^{nu+2} e^{i pi nu/2} R(z_d) / (g0 Gamma(nu+1) Re(gamma / xi^{nu+1}))."""
    nu = res.nu
    g0 = res.g0 if g0 is None else g0
    denom = g0 * math.gamma(nu + 1.0) * (res.gamma * complex_power(res.xi, -nu - 1.0)).real
    if denom == 0:
        raise DegenerateDenominator("Re(gamma / xi^{nu+1}) vanishes")
    C = (2.0 * math.pi) ** (nu + 2.0) * np.exp(0.5j * math.pi * nu) * complex(residue) / denom
    return TransitionConstant(complex(C))


def eta_ratio(n, C, x_d, nu):
    """|A_e / A_ne| = |C| n^{nu+1} e^{-2 pi x_d n}."""
    n = np.asarray(n, dtype=float)
    return C.modulus * n ** (nu + 1.0) * np.exp(-2.0 * math.pi * x_d * n)


def m_function(n, C, x_d, nu):
    """m(n) = 2 / (eta + 1/eta), in (0, 1]."""
    eta = eta_ratio(n, C, x_d, nu)
    with np.errstate(divide="ignore"):
        return 2.0 / (eta + 1.0 / eta)


def modulating_I(n, C, x_d, nu):
    """I(n) = 1 + m(n) cos(2 pi n - Arg C)."""
    n = np.asarray(n, dtype=float)
    return 1.0 + m_function(n, C, x_d, nu) * np.cos(2.0 * math.pi * n - C.phase)


def n_min_m(x_d, nu):
    """Maximum of eta (minimum of m) at (nu + 1) / (2 pi x_d)."""
    return (nu + 1.0) / (2.0 * math.pi * x_d)


def n_cl_solve(C, x_d, nu):
    """Both roots of n^{2nu+2} e^{-4 pi x_d n} = |C|^{-2}; the larger is n_cl."""
    h = lambda n: math.log(C.modulus) + (nu + 1.0) * math.log(n) - 2.0 * math.pi * x_d * n
    peak = n_min_m(x_d, nu)
    if h(peak) <= 0:
        raise NoIntersection(f"eta never reaches 1 (max log eta = {h(peak):.3g})")
    lo = peak
    while h(lo) > 0:
        lo *= 0.5
    hi = peak
    while h(hi) > 0:
        hi *= 2.0
    small = brentq(h, lo, peak, xtol=ROOT_XTOL * peak, rtol=1e-15)
    large = brentq(h, peak, hi, xtol=ROOT_XTOL * peak, rtol=1e-15)
    return small, large


# region report

@dataclass(frozen=True)
class RegionReport:
    x_d: float
    nu: float
    b_s: float
    tau_cs_oscillation: float
    tau_cs_intersection: tuple
    tau_cs_ghirardi: float
    n_cs_ghirardi: float
    alpha: float
    n_cl: float
    n_small: float
    n_min_m: float
    intervals: tuple
    C: complex
    residue: complex
    R2: float

    def as_dict(self):
        return {
            "x_d": self.x_d,
            "nu": self.nu,
            "b_s": self.b_s,
            "tau_cs_oscillation": self.tau_cs_oscillation,
            "tau_cs_intersection": list(self.tau_cs_intersection),
            "tau_cs_intersection_count": len(self.tau_cs_intersection),
            "tau_cs_ghirardi": self.tau_cs_ghirardi,
            "n_cs_ghirardi": self.n_cs_ghirardi,
            "alpha": self.alpha,
            "n_cl": self.n_cl,
            "n_small": self.n_small,
            "n_min_m": self.n_min_m,
            "intervals": [list(iv) for iv in self.intervals],
            "C": [self.C.real, self.C.imag],
            "residue": [self.residue.real, self.residue.imag],
            "R2": self.R2,
        }


def intersection_R2(dos, residue="narrow"):
    """|R_bar(z_d)|^2 for the small-time intersection condition.

    ``narrow`` uses the un-normalized narrow residue R = (i/2) g(z_d), which
    reproduces the published table; ``normalized`` uses R(z_d) of the
    normalized density.
    """
    if residue == "narrow":
        R = 0.5j * complex(dos.form_factor(dos.pole_set.dominant.z))
    elif residue == "normalized":
        R = dos.dominant_residue
    else:
        raise ValueError("residue must be 'narrow' or 'normalized'")
    return abs(2.0 * math.pi * R) ** 2


def region_boundaries(dos, residue="narrow"):
    """All critical times and the three region intervals for the dominant pole."""
    res = dos.resonance
    x_d, nu = res.x_d, res.nu
    var = variance(dos) / dos.pole_set.dominant.sigma ** 2
    alpha = 2.0 * x_d / math.sqrt(var) if var > 0 else float("nan")
    tau_g, n_g = ghirardi_critical_time(var, 2.0 * x_d) if var > 0 else (float("nan"),) * 2
    R2 = intersection_R2(dos, residue)
    roots = tuple(critical_time_intersection(alpha, R2)) if var > 0 else ()
    C = transition_constant(res, dos.dominant_residue)
    small, ncl = n_cl_solve(C, x_d, nu)
    nmin = n_min_m(x_d, nu)
    intervals = ((1.0, nmin), (nmin, 2.0 * ncl - nmin), (2.0 * ncl - nmin, math.inf))
    return RegionReport(
        x_d, nu, res.b_s, critical_time_first_oscillation(x_d), roots, tau_g, n_g, alpha, ncl, small, nmin,
        intervals, C.C, dos.dominant_residue, R2,
    )


# piecewise description of P(n)

def small_time_N(n, x_d, nu, b_s):
    """The background integral N(n) of the small-time ratio A_ne / A_e ~ e^{2 pi i n} N(n).

    Integrated on the ray y = r e^{i pi/4}, where e^{i b y} and e^{-2 pi n y}
    both decay, so n -> 0 is harmless.
    """
    n = float(n)
    theta = min(math.pi / 4.0, 0.5 * (math.pi / 2.0 - x_d))
    rot = complex(math.cos(theta), math.sin(theta))
    z_d = complex(1.0, -x_d)
    pa = complex(math.cos(x_d), math.sin(x_d))
    decay = 2.0 * math.pi * n * rot.real + b_s * rot.imag
    r_max = 42.0 / decay + 2.0
    br = quad.graded_breaks(0.0, r_max, (1.0,), (abs(1j * pa - rot),), max_len=4.0 / decay, origin_scales=(min(0.5, 1.0 / decay),))
    br = quad.cap_length(br, 2.0 * math.pi * n * rot.imag + b_s * rot.real)

    def f(r):
        y = r * rot
        g = np.exp(1j * b_s * y + b_s * z_d)
        bracket = np.exp(-1j * nu * x_d) / (y - 1j * pa) - np.exp(1j * nu * x_d) / (y - 1j * np.conj(pa))
        return g * np.power(-1j * y, nu) * np.exp(-2.0 * math.pi * n * y) * bracket

    value, err = quad.integrate(f, br, left_power=nu)
    if err > 1e-9 * max(1.0, abs(value)):
        raise QuadratureNonconvergence(f"N(n) at n={n:g}: error estimate {err:.2e}", err)
    return complex(rot * value / (2j * math.pi))


def piecewise_P(n, report, dos=None):
    """P(n) from the region-appropriate approximation.

    (0, 1): small-time form with N(n); region i: exponential with the first
    interference correction; region ii: I(n) (P_e + P_ne); region iii:
    power law with the interference correction.  The background term is
    4 pi^2 |R / C|^2 / n^{2 nu + 2}, which is |A_e|^2 / eta^2.
    """
    n = float(n)
    x_d, nu = report.x_d, report.nu
    C = TransitionConstant(report.C)
    R2 = 4.0 * math.pi**2 * abs(report.residue) ** 2
    pe = R2 * math.exp(-4.0 * math.pi * x_d * n)
    if n <= 0:
        return 1.0
    if n < 1.0:
        N = small_time_N(n, x_d, nu, report.b_s)
        return pe * abs(1.0 + np.exp(2j * math.pi * n) * N) ** 2
    pne = R2 / (C.modulus**2 * n ** (2.0 * nu + 2.0))
    cos = math.cos(2.0 * math.pi * n - C.phase)
    (_, a), (_, b), _ = report.intervals
    if n < a:
        return pe * (1.0 + 2.0 / C.modulus * math.exp(2.0 * math.pi * x_d * n) / n ** (nu + 1.0) * cos)
    if n < b:
        return float(modulating_I(n, C, x_d, nu)) * (pe + pne)
    return pne * (1.0 + 2.0 * C.modulus * n ** (nu + 1.0) * math.exp(-2.0 * math.pi * x_d * n) * cos)


# several poles

@dataclass(frozen=True)
class MultiPoleModulation:
    tau: np.ndarray
    M_nearest: np.ndarray
    M_full: np.ndarray
    omega_t: float
    damping_rate: float
    nearest_index: int = field(default=0)


def _bar_residues(source):
    """Poles and R_bar = -2 pi i R from a DensityOfStates or a PoleSet."""
    pole_set = getattr(source, "pole_set", source)
    if hasattr(source, "residues") and not hasattr(source, "poles"):
        R = np.asarray(source.residues)
    elif pole_set.narrow_mode:
        R = np.full(len(pole_set), 0.5j)
    else:
        R = np.asarray(pole_set.residues)
    return pole_set, -2j * math.pi * R


def multi_pole_modulation(source, tau):
    """Modulation M(tau) of P_e by the non-dominant poles.

    ``M_full`` keeps every pole, ``M_nearest`` only the pole nearest to the
    dominant one (smallest |z_s - z_d|).  omega_t = (sigma_{d+1} - sigma_d)
    / omega_d and the envelope decays at (omega_{d+1}/omega_d - 1)/2 per
    unit tau.
    """
    pole_set, Rb = _bar_residues(source)
    if len(pole_set) < 2:
        raise SinglePole("the modulation needs at least two poles")
    d = pole_set.dominant_index
    pd = pole_set.poles[d]
    z = pole_set.z
    others = [s for s in range(len(pole_set)) if s != d]
    near = min(others, key=lambda s: abs(z[s] - z[d]))
    tau = np.asarray(tau, dtype=float)
    t = tau / pd.omega

    def term(s):
        p = pole_set.poles[s]
        ratio = Rb[s] / Rb[d]
        return 2.0 * (ratio * np.exp(-1j * (p.sigma - pd.sigma) * t)).real * np.exp(-0.5 * (p.omega - pd.omega) * t)

    full = 1.0 + sum(term(s) for s in others)
    nearest = 1.0 + term(near)
    pn = pole_set.poles[near]
    return MultiPoleModulation(
        tau, nearest, full, (pn.sigma - pd.sigma) / pd.omega, 0.5 * (pn.omega / pd.omega - 1.0), near
    )


def exponential_probability_full(source, t):
    """P_e(t) written around the dominant pole, every pair of poles counted once."""
    pole_set, Rb = _bar_residues(source)
    d = pole_set.dominant_index
    order = [d] + [s for s in range(len(pole_set)) if s != d]
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape)
    for i, sp in enumerate(order):
        p = pole_set.poles[sp]
        bracket = np.ones(t.shape)
        for s in order[i + 1:]:
            q = pole_set.poles[s]
            ratio = Rb[s] / Rb[sp]
            bracket += 2.0 * (ratio * np.exp(-1j * (q.sigma - p.sigma) * t)).real * np.exp(-0.5 * (q.omega - p.omega) * t)
        total += abs(Rb[sp]) ** 2 * np.exp(-p.omega * t) * bracket
    return total


def exponential_probability_direct(source, t):
    pole_set, Rb = _bar_residues(source)
    t = np.asarray(t, dtype=float)
    A = sum(r * np.exp(-1j * z * t) for r, z in zip(Rb, pole_set.z))
    return np.abs(A) ** 2


# the published comparison table

@dataclass(frozen=True)
class Table1Row:
    x_d: float
    tau_G: float
    tau_cs: float
    tau_osc: float
    n_G: float
    n_cs: float
    root_missing: bool
    roots: tuple


def table1(b_s=2.0, nu=0.5, x_grid=TABLE1_X, residue="narrow"):
    """Critical times of a single narrow pole for each x_d.

    Columns: tau_G = alpha^2, tau_cs from the intersection condition (largest
    root, NaN with ``root_missing`` when there is none), 4 pi x_d, n_G and
    n_cs = tau_cs / (4 pi x_d).
    """
    rows = []
    for x in x_grid:
        dos = narrow_resonance(x, nu, b_s, check_positivity=False, verify_norm=False)
        var = variance(dos)
        tau_g, n_g = ghirardi_critical_time(var, 2.0 * x)
        alpha = math.sqrt(tau_g)
        roots = critical_time_intersection(alpha, intersection_R2(dos, residue))
        tau_cs = roots[-1] if roots else float("nan")
        osc = critical_time_first_oscillation(x)
        rows.append(Table1Row(x, tau_g, tau_cs, osc, n_g, tau_cs / osc, not roots, tuple(roots)))
    return rows
