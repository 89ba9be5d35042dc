"""Moments of H in the initial state, the energy variance, and Taylor coefficients of P(t).

Closed forms are used when the form factor allows and checked against
direct quadrature of E^n rho(E).  Central moments are expanded about
sigma_d rather than computed as <H^2> - <H>^2: for narrow resonances the
variance is O(x_d) while <H>^2 is O(1), so the naive difference would
lose most of its digits.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import binom, gammaln

from .dos import ConstantFormFactor, ExponentialFormFactor, Pole, PoleSet, build_dos
from .errors import MomentDivergent, MomentMismatch, NegativeVariance, QuadratureNonconvergence
from .special import complex_power, upper_incomplete_gamma_scaled

MAX_ORDER = 8
MOMENT_RTOL = 1e-7
SIGN_RTOL = 1e-4


@dataclass(frozen=True)
class MomentTable:
    values: tuple
    variance: float

    def as_dict(self):
        return {"values": list(self.values), "variance": self.variance}


def _gamma_central(nu, b, c, i):
    """int_0^inf E^nu e^{-bE} (E - c)^i dE."""
    total = 0.0
    for l in range(i + 1):
        total += binom(i, l) * (-c) ** (i - l) * math.exp(gammaln(nu + l + 1.0) - (nu + l + 1.0) * math.log(b))
    return total


def _exponential_central(dos, k, c):
    """N <(H - c)^k> for g = e^{-bE} from the pole expansion (all pieces closed form)."""
    nu, b = dos.nu, dos.form_factor.b
    G = [_gamma_central(nu, b, c, i) for i in range(k + 1)]
    total = 0j
    for zs, gs in zip(dos.pole_set.z, dos.gammas):
        d = zs - c
        # J = int E^nu g / (z - E)
        J = -math.gamma(nu + 1.0) * complex_power(-zs, nu) * upper_incomplete_gamma_scaled(-nu, -b * zs)
        # (E - c)^k / (z - E) = d^k / (z - E) - sum_{j>=1} C(k, j) d^{k-j} (E - z)^{j-1}
        acc = d**k * J
        for j in range(1, k + 1):
            m = j - 1
            # int E^nu g (E - z)^m = sum_i C(m, i) (c - z)^{m-i} G_i
            poly = sum(binom(m, i) * (-d) ** (m - i) * G[i] for i in range(m + 1))
            acc -= binom(k, j) * d ** (k - j) * poly
        total += gs * complex_power(zs, -nu) * acc
    return total.real


def _constant_central(dos, k, c):
    """<(H - c)^k> = -(pi / sin pi nu) sum_s (z_s - c)^k R e^{i pi nu sgn s}."""
    nu = dos.nu
    R = np.asarray(dos.raw_residues)
    z = dos.pole_set.z
    s = 2.0 * np.sum((z - c) ** k * R * np.exp(1j * math.pi * nu)).real
    return -math.pi / math.sin(math.pi * nu) * s


def _check_constant_finiteness(dos, n):
    from .dos import constant_ff_conditions

    _, cond = constant_ff_conditions(PoleSet(dos.pole_set.poles, tuple(dos.residues)), dos.nu, n)
    scale = [max(1.0, float(np.max(np.abs(dos.pole_set.z))) ** p) for p in range(n + 1)]
    bad = [p for p, (v, s) in enumerate(zip(cond, scale)) if abs(v) > 1e-9 * s]
    if bad:
        raise MomentDivergent(f"<H^{n}> diverges: finiteness condition fails for p = {bad}")


def central_moment(dos, k, center=None):
    """<(H - c)^k> with c = sigma_d by default, from the closed form."""
    c = dos.pole_set.dominant.sigma if center is None else float(center)
    if k > MAX_ORDER:
        raise ValueError(f"moment order is capped at {MAX_ORDER}")
    if isinstance(dos.form_factor, ExponentialFormFactor):
        return _exponential_central(dos, k, c) / dos.norm
    if isinstance(dos.form_factor, ConstantFormFactor):
        _check_constant_finiteness(dos, k)
        return _constant_central(dos, k, c) / dos.norm
    raise TypeError(f"no closed form for {dos.form_factor!r}")


def moment_quadrature(dos, n):
    try:
        return dos.fourier(0.0, power=n).real
    except QuadratureNonconvergence as exc:
        raise MomentDivergent(f"<H^{n}> quadrature failed: {exc}") from exc


def moment(dos, n, check=True):
    """<H^n>_0, validated against quadrature of E^n rho(E) to 1e-7 relative."""
    if n < 0 or n != int(n):
        raise ValueError("n must be a non-negative integer")
    n = int(n)
    value = central_moment(dos, n, center=0.0)
    if check:
        numeric = moment_quadrature(dos, n)
        if abs(value - numeric) > MOMENT_RTOL * max(abs(value), 1e-300):
            raise MomentMismatch(f"<H^{n}>: closed form {value!r} vs quadrature {numeric!r}")
    return value


def variance(dos):
    """<(Delta H)^2>_0 from moments about sigma_d."""
    m1 = central_moment(dos, 1)
    m2 = central_moment(dos, 2)
    return m2 - m1 * m1


def moment_table(dos, order=4, check=True):
    values = tuple(moment(dos, n, check=check) for n in range(order + 1))
    return MomentTable(values, variance(dos))


def _narrow_dos(x_d, nu, b_s):
    return build_dos(
        PoleSet((Pole(1.0, 2.0 * x_d),)), nu, ExponentialFormFactor(b_s), check_positivity=False, verify_norm=False
    )


def narrow_variance(x_d, nu, b_s):
    """Variance of the single narrow-pole density at sigma_d = 1."""
    return variance(_narrow_dos(x_d, nu, b_s))


def variance_sign_scan(x_d, nu, b_grid):
    """Sign of the variance at each b_s of the grid."""
    return [(float(b), int(np.sign(narrow_variance(x_d, nu, b)))) for b in b_grid]


def _bisect_log(f, lo, hi, rtol):
    flo = f(lo)
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return math.sqrt(lo * hi)


def negative_variance_intervals(x_d, nu, b_min=1e-14, b_max=1e2, points=400, rtol=SIGN_RTOL):
    """Intervals of b_s with negative variance, endpoints refined by bisection in log b_s."""
    grid = np.geomspace(b_min, b_max, points)
    f = lambda b: narrow_variance(x_d, nu, b)
    signs = [np.sign(f(b)) for b in grid]
    edges = []
    for i in range(points - 1):
        if signs[i] != signs[i + 1]:
            edges.append(_bisect_log(f, grid[i], grid[i + 1], rtol))
    intervals = []
    start = b_min if signs[0] < 0 else None
    for e in edges:
        if start is None:
            start = e
        else:
            intervals.append((start, e))
            start = None
    if start is not None:
        intervals.append((start, b_max))
    return intervals


def taylor_p(moments, order):
    """p_n = sum_m (-1)^m C(n, m) <H^m> <H^{n-m}> for n = 0..order."""
    h = moments.values if isinstance(moments, MomentTable) else tuple(moments)
    if order >= len(h):
        raise ValueError(f"need moments up to order {order}")
    p = []
    for n in range(order + 1):
        if n % 2:
            p.append(0.0)
            continue
        p.append(float(sum((-1) ** m * binom(n, m) * h[m] * h[n - m] for m in range(n + 1))))
    return p


def taylor_p_raw(moments, n):
    """The alternating sum for p_n evaluated literally, odd n included."""
    h = moments.values if isinstance(moments, MomentTable) else tuple(moments)
    return float(sum((-1) ** m * binom(n, m) * h[m] * h[n - m] for m in range(n + 1)))


def taylor_P(p, t):
    """Sum over even n of (-1)^{n/2} p_n t^n / n!."""
    t = np.asarray(t, dtype=float)
    total = np.zeros(t.shape)
    for n in range(0, len(p), 2):
        total += (-1) ** (n // 2) * p[n] * t**n / math.factorial(n)
    return total


def small_time_P(variance, t):
    """Quadratic law 1 - <(Delta H)^2> t^2."""
    if not variance > 0:
        raise NegativeVariance(f"variance {variance:.3g} is not positive; the form factor is unphysical")
    return 1.0 - variance * np.asarray(t, dtype=float) ** 2


def small_time_validity(variance):
    """Largest t where the quadratic law stays non-negative, alpha / omega_d = 1 / sqrt(variance)."""
    if not variance > 0:
        raise NegativeVariance(f"variance {variance:.3g} is not positive")
    return 1.0 / math.sqrt(variance)


def pole_coefficients(dos, order):
    """B_n = -2 pi i sum_{s>0} z_s^n R(z_s), n = 0..order."""
    z = dos.pole_set.z
    R = dos.residues
    return [complex(-2j * math.pi * np.sum(z**n * R)) for n in range(order + 1)]


def product_series(a, b):
    """Coefficients of t^n in X Y^* where X = sum (-it)^n a_n / n!, Y likewise with b."""
    out = []
    for n in range(min(len(a), len(b))):
        s = sum((-1) ** m * binom(n, m) * a[m] * np.conj(b[n - m]) for m in range(n + 1))
        out.append(complex(1j**n * s / math.factorial(n)))
    return out


def decomposed_taylor(dos, order=2, moments=None):
    """Taylor coefficients of P_e, P_ne and P_i about t = 0."""
    if moments is None:
        moments = [moment(dos, n, check=False) for n in range(order + 1)]
    B = pole_coefficients(dos, order)
    M = [complex(m) - bb for m, bb in zip(moments, B)]
    pe = [c.real for c in product_series(B, B)]
    pne = [c.real for c in product_series(M, M)]
    pi_ = [2.0 * c.real for c in product_series(B, M)]
    return {"P_e": pe, "P_ne": pne, "P_i": pi_}
