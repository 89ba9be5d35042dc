"""Survival amplitude A(t), probability P(t) and their decomposition.

Three independent routes compute A(t) = int rho(E) exp(-iEt) dE:

* ``quadrature`` integrates the Fourier integral on the real axis;
* ``closed_form`` uses incomplete-gamma sums (exponential or constant
  form factor);
* ``decomposition`` adds the pole part A_e = -2 pi i sum R e^{-izt} to the
  background A_ne = -i int rho(-iy) e^{-ty} dy, integrated on a ray rotated
  into the upper half y-plane.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import quadrature as quad
from .dos import ConstantFormFactor, DensityOfStates, ExponentialFormFactor
from .errors import QuadratureNonconvergence
from .special import complex_power, principal_arg, upper_incomplete_gamma_scaled

ROUTES = ("quadrature", "closed_form", "decomposition")
RAY_TOL = 1e-10


@dataclass(frozen=True)
class AmplitudeBreakdown:
    total: complex
    exponential: complex
    nonexponential: complex


def amplitude_quadrature(dos, t):
    """A(t) by composite Gauss quadrature of the Fourier integral."""
    return dos.fourier(float(t))


def _exp_gamma_term(nu, b, t, z):
    """e^{-pz} Gamma(-nu, -pz) for p = b + it, continued along t from t = 0."""
    w = -(b + 1j * t) * z
    # arg(-z) + arg(p) is the continuous phase of w; past pi it is on sheet +1
    phase = principal_arg(-z) + math.atan2(t, b)
    sheet = 1 if phase > math.pi else (-1 if phase <= -math.pi else 0)
    if w.imag == 0 and w.real < 0:
        w = complex(w.real, 1e-300 if sheet == 0 else -1e-300)
    return upper_incomplete_gamma_scaled(-nu, w, sheet)


def _exponential_closed_sum(nu, b, t, z, gammas):
    total = 0j
    for zs, gs in zip(z, gammas):
        total += np.exp(1j * math.pi * nu) * gs * _exp_gamma_term(nu, b, t, zs)
        zc = zs.conjugate()
        total += np.exp(-1j * math.pi * nu) * np.conj(gs) * _exp_gamma_term(nu, b, t, zc)
    return total


def _closed_exponential(nu, b, t, z, gammas):
    return _exponential_closed_sum(nu, b, t, z, gammas) / _exponential_closed_sum(nu, b, 0.0, z, gammas)


def _closed_constant_nonexp(nu, t, z, residues):
    """Background part of the constant-form-factor closed form."""
    from scipy.special import gamma as _gamma

    total = 0j
    for zs, R in zip(z, residues):
        for zz, RR in ((zs, R), (zs.conjugate(), np.conj(R))):
            w = -1j * zz * t
            total += RR * upper_incomplete_gamma_scaled(-nu, w)
    return -math.pi / math.sin(math.pi * nu) * np.exp(-1j * math.pi * nu) * total / _gamma(-nu)


def pole_amplitude(dos, t):
    """A_e(t) = -2 pi i sum_{s>0} R(z_s) e^{-i z_s t}."""
    z = dos.pole_set.z
    return complex(-2j * math.pi * np.sum(dos.residues * np.exp(-1j * z * t)))


def amplitude_closed(dos, t):
    """A(t) from the incomplete-gamma closed form of the density's form factor."""
    t = float(t)
    if t == 0:
        return 1.0 + 0j
    if isinstance(dos.form_factor, ExponentialFormFactor):
        return complex(_closed_exponential(dos.nu, dos.form_factor.b, t, dos.pole_set.z, dos.gammas))
    if isinstance(dos.form_factor, ConstantFormFactor):
        return pole_amplitude(dos, t) + complex(_closed_constant_nonexp(dos.nu, t, dos.pole_set.z, dos.residues))
    raise TypeError(f"no closed form for {dos.form_factor!r}")


def amplitude_closed_exponential(res, n):
    """A at n oscillations for one narrow pole, sigma_d = 1, g = e^{-b_s E}.

    The arguments are p z_s = (b_s + i tau / 2x) xi_s; the denominator is the
    same sum at tau = 0, so A(0) = 1 exactly.
    """
    n = float(n)
    t = 2.0 * math.pi * n
    if n == 0:
        return 1.0 + 0j
    return complex(_closed_exponential(res.nu, res.b_s, t, (res.xi,), (res.gamma,)))


def _ray_angle(dos):
    # poles of rho(-iy) sit at y = +-omega/2 + i sigma
    phi = min(math.atan2(p.sigma, 0.5 * p.omega) for p in dos.pole_set.poles)
    return min(math.pi / 4.0, 0.5 * phi)


def nonexponential_amplitude(dos, t, tol=RAY_TOL):
    """A_ne(t) = -i int_0^inf rho(-iy) e^{-ty} dy along a rotated ray."""
    t = float(t)
    theta = _ray_angle(dos)
    rot = complex(math.cos(theta), math.sin(theta))
    b = dos.form_factor.b if dos.exponential else 0.0
    decay = t * rot.real + b * rot.imag
    if decay <= 0:
        # constant form factor at t = 0: only the normalization fixes it
        return 1.0 - pole_amplitude(dos, 0.0)
    zabs = np.abs(dos.pole_set.z)
    r_max = 42.0 / decay + 2.0 * float(zabs.max())
    origin = min(0.5 * float(zabs.min()), 1.0 / decay)
    dist = np.array([abs(1j * z - abs(z) * rot) for z in dos.pole_set.z])
    br = quad.graded_breaks(0.0, r_max, zabs, dist, max_len=4.0 / decay, origin_scales=(origin,))
    br = quad.cap_length(br, t * rot.imag + b * rot.real)

    def f(r):
        y = r * rot
        return dos.continued(-1j * y) * np.exp(-t * y)

    value, err = quad.integrate(f, br, left_power=dos.nu)
    if err > tol * max(1.0, abs(value)):
        raise QuadratureNonconvergence(f"A_ne ray integral at t={t:g}: error estimate {err:.2e}", err)
    return complex(-1j * rot * value)


def amplitude_decomposed(dos, t):
    """A = A_e + A_ne with both parts computed independently."""
    a_e = pole_amplitude(dos, t)
    a_ne = nonexponential_amplitude(dos, t)
    return AmplitudeBreakdown(a_e + a_ne, a_e, a_ne)


def amplitude(dos, t, route="closed_form"):
    if route == "quadrature":
        return amplitude_quadrature(dos, t)
    if route == "closed_form":
        return amplitude_closed(dos, t)
    if route == "decomposition":
        return amplitude_decomposed(dos, t).total
    raise ValueError(f"unknown route {route!r}; expected one of {ROUTES}")


@dataclass(frozen=True)
class SurvivalCurve:
    t: np.ndarray
    tau: np.ndarray
    n: np.ndarray
    A: np.ndarray
    A_e: np.ndarray
    A_ne: np.ndarray
    route: str

    @property
    def P(self):
        return np.abs(self.A) ** 2

    @property
    def P_e(self):
        return np.abs(self.A_e) ** 2

    @property
    def P_ne(self):
        return np.abs(self.A_ne) ** 2

    @property
    def P_i(self):
        return 2.0 * (np.conj(self.A_e) * self.A_ne).real

    @property
    def grid(self):
        return list(zip(self.t, self.tau, self.n))


def _breakdown(dos, t, route):
    if route == "decomposition":
        br = amplitude_decomposed(dos, t)
        return br.total, br.exponential, br.nonexponential
    total = amplitude(dos, t, route)
    a_e = pole_amplitude(dos, t)
    return total, a_e, total - a_e


def survival_probability(dos, t=None, tau=None, n=None, route="closed_form", workers=None):
    """Sample A, A_e, A_ne on a time grid given in t, tau or n.

    For the quadrature and closed-form routes A_ne is A - A_e; the
    decomposition route integrates it separately.  ``workers`` > 1 evaluates
    grid points on a thread pool; results keep grid order.
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; expected one of {ROUTES}")
    t, tau, n = dos.time_coordinates(t=t, tau=tau, n=n)
    if np.any(np.diff(t) < 0):
        raise ValueError("time grid must be monotone")
    job = lambda tt: _breakdown(dos, float(tt), route)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, t))
    else:
        rows = [job(tt) for tt in t]
    arr = np.array(rows, dtype=complex).reshape(len(t), 3)
    return SurvivalCurve(t, tau, n, arr[:, 0], arr[:, 1], arr[:, 2], route)


def large_time_asymptote(dos, t):
    """Leading power law |beta_0|^2 Gamma(nu+1)^2 / t^{2 nu + 2}."""
    from .dos import dos_asymptotic_beta0

    beta0 = dos_asymptotic_beta0(dos)
    t = np.asarray(t, dtype=float)
    return beta0**2 * math.gamma(dos.nu + 1.0) ** 2 / t ** (2.0 * dos.nu + 2.0)


def asymptotic_A_ne(res, n):
    """Large-n background amplitude (-i)^{nu+1} g0 Re(gamma / xi^{nu+1}) Gamma(nu+1) / (2 pi n)^{nu+1}."""
    nu = res.nu
    lead = res.g0 * (res.gamma * complex_power(res.xi, -nu - 1.0)).real
    phase = complex_power(-1j, nu + 1.0)
    return complex(phase * lead * math.gamma(nu + 1.0) / (2.0 * math.pi * np.asarray(n, dtype=float)) ** (nu + 1.0))
