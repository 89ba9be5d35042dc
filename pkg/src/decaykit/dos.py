"""Density of states built from resonance poles.

The density is the pole expansion

    rho(E) = E^nu g(E) Re sum_{s>0} gamma_s z_s^{-nu} / (z_s - E),

divided by its integral N so that it is normalized.  Poles lie in the
fourth quadrant, z_s = sigma_s - i omega_s / 2; the conjugate partners are
implied.  Energies may be in any unit; ``narrow_resonance`` uses
sigma_d = 1, which makes x_d and b_s the only parameters.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import quadrature as quad
from .errors import (
    ConfigError,
    ConstantFFConditionsViolated,
    GaussianRejected,
    NarrowModeNotAllowed,
    NegativeDensity,
    NormalizationMismatch,
    NuOutOfRange,
    QuadratureNonconvergence,
    SingleResonanceConstantFF,
)
from .special import complex_power, upper_incomplete_gamma, upper_incomplete_gamma_scaled

NARROW_THRESHOLD = 0.15
NORM_RTOL = 1e-8
CONDITION_TOL = 1e-10
POSITIVITY_GRID = (1e-6, 1e3, 10_000)
POSITIVITY_TOL = 1e-2
QUAD_TOL = 1e-10
# e^{-b E} below exp(-TAIL_EXPONENT) is treated as zero
TAIL_EXPONENT = 42.0
# constant form factor: the algebraic tail starts at this multiple of max |z_s|
TAIL_START = 50.0


@dataclass(frozen=True)
class Pole:
    """Fourth-quadrant pole z = sigma - i omega / 2."""

    sigma: float
    omega: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.omega > 0):
            raise ConfigError(f"pole needs sigma > 0 and omega > 0, got ({self.sigma}, {self.omega})")

    @property
    def z(self):
        return complex(self.sigma, -0.5 * self.omega)

    @property
    def x(self):
        """Width-to-position ratio x = |Im z| / Re z."""
        return 0.5 * self.omega / self.sigma

    @classmethod
    def from_physical(cls, re_kev, im_ev):
        """Pole given as Re z in keV and |Im z| in eV; energies returned in keV."""
        return cls(float(re_kev), 2.0 * abs(float(im_ev)) * 1e-3)


@dataclass(frozen=True)
class PoleSet:
    """Fourth-quadrant poles with their residues, or narrow mode (gamma = -i)."""

    poles: tuple
    residues: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(self.poles))
        if not self.poles:
            raise ConfigError("a pole set needs at least one pole")
        if self.residues is not None:
            res = tuple(complex(r) for r in self.residues)
            if len(res) != len(self.poles):
                raise ConfigError("one residue per pole is required")
            object.__setattr__(self, "residues", res)

    @property
    def narrow_mode(self):
        return self.residues is None

    @property
    def dominant_index(self):
        return int(np.argmin([p.omega for p in self.poles]))

    @property
    def dominant(self):
        return self.poles[self.dominant_index]

    @property
    def z(self):
        return np.array([p.z for p in self.poles])

    def __len__(self):
        return len(self.poles)


@dataclass(frozen=True)
class ExponentialFormFactor:
    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ConfigError(f"exponential form factor needs b > 0, got {self.b}")

    def __call__(self, z):
        return np.exp(-self.b * np.asarray(z))


@dataclass(frozen=True)
class ConstantFormFactor:
    def __call__(self, z):
        return np.ones_like(np.asarray(z), dtype=float) if np.ndim(z) else 1.0


@dataclass(frozen=True)
class GaussianFormFactor:
    """exp(-a E^2); representable so it can be rejected with a reason."""

    a: float

    def __call__(self, z):
        z = np.asarray(z)
        return np.exp(-self.a * z * z)


@dataclass(frozen=True)
class DimensionlessResonance:
    """A pole in units of its own position: xi = 1 - i x, b_s = b sigma."""

    x_d: float
    nu: float
    b_s: float
    # coefficient gamma(z_d) / N of the normalized density, and g(0)
    gamma: complex = -1j
    g0: float = 1.0

    @property
    def xi(self):
        return complex(1.0, -self.x_d)

    def tau_from_n(self, n):
        return 4.0 * math.pi * self.x_d * np.asarray(n, dtype=float)

    def n_from_tau(self, tau):
        return np.asarray(tau, dtype=float) / (4.0 * math.pi * self.x_d)

    def t_from_tau(self, tau):
        """Time in units of 1/sigma_d."""
        return np.asarray(tau, dtype=float) / (2.0 * self.x_d)


@dataclass(frozen=True, eq=False)
class DensityOfStates:
    nu: float
    form_factor: object
    pole_set: PoleSet
    gammas: tuple
    norm: float = 1.0
    min_ratio: float = field(default=0.0, compare=False)

    # pole data as arrays
    @cached_property
    def _z(self):
        return self.pole_set.z

    @cached_property
    def _coef(self):
        """gamma_s z_s^{-nu} / N."""
        zn = np.array([complex_power(z, -self.nu) for z in self._z])
        return np.asarray(self.gammas) * zn / self.norm

    @property
    def exponential(self):
        return isinstance(self.form_factor, ExponentialFormFactor)

    @property
    def g0(self):
        return float(self.form_factor(0.0))

    def smooth(self, E):
        """rho(E) / E^nu, analytic on the positive axis."""
        E = np.asarray(E, dtype=float)
        s = np.zeros(E.shape)
        for c, z in zip(self._coef, self._z):
            s += (c / (z - E)).real
        return self.form_factor(E) * s

    def __call__(self, E):
        E = np.asarray(E, dtype=float)
        return np.power(E, self.nu) * self.smooth(E)

    def continued(self, z):
        """Analytic continuation rho(z) off the real axis (principal z^nu)."""
        z = np.asarray(z, dtype=complex)
        s = np.zeros(z.shape, dtype=complex)
        for c, zs in zip(self._coef, self._z):
            s += c / (zs - z) + np.conj(c) / (np.conj(zs) - z)
        return 0.5 * np.power(z, self.nu) * self.form_factor(z) * s

    @property
    def residues(self):
        """Residues R(z_s) of the normalized density at the fourth-quadrant poles."""
        g = np.array([complex(self.form_factor(z)) for z in self._z])
        return -0.5 * np.asarray(self.gammas) * g / self.norm

    @property
    def raw_residues(self):
        return self.residues * self.norm

    @property
    def dominant_residue(self):
        return complex(self.residues[self.pole_set.dominant_index])

    @property
    def resonance(self):
        """Dimensionless description of the dominant pole."""
        p = self.pole_set.dominant
        b_s = self.form_factor.b * p.sigma if self.exponential else 0.0
        # gamma / N rescaled to sigma_d = 1 (rho scales as 1 / energy)
        gamma = self.dominant_gamma / self.norm * p.sigma
        return DimensionlessResonance(p.x, self.nu, b_s, gamma, self.g0)

    @property
    def dominant_gamma(self):
        return complex(self.gammas[self.pole_set.dominant_index])

    # quadrature support
    @cached_property
    def _base_breaks(self):
        sig = np.array([p.sigma for p in self.pole_set.poles])
        half = 0.5 * np.array([p.omega for p in self.pole_set.poles])
        e_max = self.energy_cutoff
        cap = 4.0 / self.form_factor.b if self.exponential else None
        zmin = float(np.min(np.abs(self._z)))
        br = quad.graded_breaks(0.0, e_max, sig, half, max_len=cap, origin_scales=())
        # keep the Jacobi panel well inside the disc free of poles
        first = 0.5 * zmin
        if br[1] > first:
            br = np.insert(br, 1, first)
        return br

    @cached_property
    def energy_cutoff(self):
        top = max(p.sigma + 60.0 * p.omega for p in self.pole_set.poles)
        top = max(top, 2.0 * max(p.sigma for p in self.pole_set.poles))
        if self.exponential:
            return top + TAIL_EXPONENT / self.form_factor.b
        return TAIL_START * float(np.max(np.abs(self._z))) + top

    def time_coordinates(self, t=None, tau=None, n=None):
        """(t, tau, n) arrays from any one of them; tau = omega_d t, n = sigma_d t / 2 pi."""
        p = self.pole_set.dominant
        given = [v is not None for v in (t, tau, n)]
        if sum(given) != 1:
            raise ValueError("give exactly one of t, tau, n")
        if tau is not None:
            t = np.asarray(tau, dtype=float) / p.omega
        elif n is not None:
            t = 2.0 * math.pi * np.asarray(n, dtype=float) / p.sigma
        t = np.asarray(t, dtype=float)
        return t, p.omega * t, p.sigma * t / (2.0 * math.pi)

    def breaks(self, t=0.0):
        return quad.cap_length(self._base_breaks, t)

    def _tail_coefficients(self, power):
        """d_j with rho(E) E^power ~ sum_j d_j E^{nu - 1 - j + power} for large E (g = 1)."""
        L = self.energy_cutoff
        zmax = float(np.max(np.abs(self._z)))
        jmax = int(math.ceil(math.log(1e-18) / math.log(zmax / L))) + 1
        d = []
        for j in range(jmax + 1):
            d.append(-float(np.sum(self._coef * self._z**j).real))
        return d

    def _algebraic_tail(self, t, power):
        if self.exponential:
            return 0j
        L = self.energy_cutoff
        total = 0j
        for j, dj in enumerate(self._tail_coefficients(power)):
            a = self.nu - 1.0 - j + power
            if t == 0:
                if dj == 0:
                    continue
                if a >= -1.0:
                    if abs(dj) > 10 * CONDITION_TOL:
                        raise QuadratureNonconvergence(
                            f"integral diverges: tail term E^{a:.3g} has coefficient {dj:.3g}"
                        )
                    continue
                total += -dj * L ** (a + 1.0) / (a + 1.0)
            else:
                w = 1j * L * t
                total += dj * complex_power(1j * t, -a - 1.0) * upper_incomplete_gamma(a + 1.0, w)
        return total

    def fourier(self, t=0.0, power=0, tol=QUAD_TOL):
        """Integral of E^power rho(E) exp(-i E t) over [0, inf) by quadrature."""
        br = self.breaks(t)
        if power:
            f = lambda E: E**power * self(E) * np.exp(-1j * t * E)
        else:
            f = lambda E: self(E) * np.exp(-1j * t * E)
        value, err = quad.integrate(f, br, left_power=self.nu)
        scale = max(1.0, abs(value))
        if err > tol * scale:
            raise QuadratureNonconvergence(f"Fourier integral at t={t:g}: error estimate {err:.2e}", err)
        return complex(value + self._algebraic_tail(t, power))


def _exponential_raw_moment(nu, b, z, gammas, n):
    """(-1)^{n+1} Gamma(1+nu+n) Re sum e^{i pi nu} z^n gamma e^{-bz} Gamma(-nu-n, -bz)."""
    total = 0j
    for zs, gs in zip(z, gammas):
        total += np.exp(1j * math.pi * nu) * zs**n * gs * upper_incomplete_gamma_scaled(-nu - n, -b * zs)
    return (-1) ** (n + 1) * math.gamma(1.0 + nu + n) * total.real


def _constant_closed_norm(nu, residues):
    """-(pi / sin pi nu) sum_s R e^{i pi nu sgn s}, both half-planes."""
    s = 2.0 * np.sum(np.asarray(residues) * np.exp(1j * math.pi * nu)).real
    return -math.pi / math.sin(math.pi * nu) * s


def constant_ff_conditions(pole_set, nu, p_max=0):
    """Residuals of the normalization and finiteness conditions for g = 1.

    Returns ``(norm_residual, [c_0, ..., c_pmax])`` where
    norm_residual = sum_s R e^{i pi nu sgn s} + sin(pi nu)/pi and
    c_p = Re sum_{s>0} z_s^{p - nu} R(z_s); all vanish for a valid set.
    """
    R = np.asarray(pole_set.residues)
    z = pole_set.z
    norm_res = 2.0 * np.sum(R * np.exp(1j * math.pi * nu)).real + math.sin(math.pi * nu) / math.pi
    zn = np.array([complex_power(zz, -nu) for zz in z])
    cond = [float(np.sum(z**p * zn * R).real) for p in range(p_max + 1)]
    return float(norm_res), cond


def order_bound_profile(nu, form_factor, pole_set, y):
    """Left side of the exponential-order bound, |y|^nu |g(-iy)| sum |gamma z^-nu| / |z + iy|.

    Bounded for admissible form factors; grows like exp(a y^2) for a
    Gaussian.  Narrow-mode gammas (-i) are used when residues are absent.
    """
    y = np.asarray(y, dtype=float)
    z = pole_set.z
    if pole_set.narrow_mode:
        gam = np.full(len(z), -1j)
    else:
        gam = np.array([-2.0 * r / complex(form_factor(zz)) for r, zz in zip(pole_set.residues, z)])
    total = np.zeros(y.shape)
    for g, zs in zip(gam, z):
        c = abs(g * complex_power(zs, -nu))
        total += c / np.abs(zs + 1j * y) + c / np.abs(np.conj(zs) + 1j * y)
    with np.errstate(over="ignore"):
        return np.abs(y) ** nu * np.abs(form_factor(-1j * y)) * total


def _check_nu(nu, ff):
    if isinstance(ff, ExponentialFormFactor) and not 0 < nu <= 1:
        raise NuOutOfRange(f"exponential form factor requires 0 < nu <= 1, got {nu}")
    if isinstance(ff, ConstantFormFactor) and not 0 < nu < 1:
        raise NuOutOfRange(f"constant form factor requires 0 < nu < 1, got {nu}")


def build_dos(pole_set, nu, ff, check_positivity=True, positivity_tol=POSITIVITY_TOL, verify_norm=True):
    """Validate the inputs, normalize and return a :class:`DensityOfStates`.

    ``positivity_tol`` is the most negative value of rho allowed on the
    check grid, relative to its maximum.  The narrow-mode density is only
    approximately positive (it dips below zero by O(x_d) above the peak),
    so an exact zero tolerance would reject the standard examples.
    """
    nu = float(nu)
    if isinstance(ff, GaussianFormFactor):
        y = np.linspace(0.0, 10.0 / math.sqrt(ff.a), 5)
        prof = order_bound_profile(nu, ff, pole_set, y)
        raise GaussianRejected(
            f"|rho(-iy)| is unbounded for a Gaussian form factor (bound profile grows to {prof[-1]:.3g})"
        )
    if not isinstance(ff, (ExponentialFormFactor, ConstantFormFactor)):
        raise ConfigError(f"unsupported form factor {ff!r}")
    _check_nu(nu, ff)

    if isinstance(ff, ConstantFormFactor):
        if len(pole_set) == 1:
            raise SingleResonanceConstantFF(
                "a lone pole with a constant form factor is only consistent at zero width"
            )
        if pole_set.narrow_mode:
            raise NarrowModeNotAllowed("constant form factor needs explicit residues")
        norm_res, cond = constant_ff_conditions(pole_set, nu, 0)
        if abs(norm_res) > CONDITION_TOL or abs(cond[0]) > CONDITION_TOL:
            raise ConstantFFConditionsViolated(
                f"normalization residual {norm_res:.3g}, finiteness residual {cond[0]:.3g}"
            )
    if pole_set.narrow_mode:
        xmax = max(p.x for p in pole_set.poles)
        if xmax > NARROW_THRESHOLD:
            raise NarrowModeNotAllowed(f"narrow mode needs x_s <= {NARROW_THRESHOLD}, got {xmax:.3g}")
        gammas = tuple(-1j for _ in pole_set.poles)
    else:
        gammas = tuple(complex(-2.0 * r / complex(ff(p.z))) for r, p in zip(pole_set.residues, pole_set.poles))

    raw = DensityOfStates(nu, ff, pole_set, gammas, 1.0)
    norm = normalize_dos(raw, verify=verify_norm)
    if check_positivity and not norm > 0:
        raise NegativeDensity(f"density integrates to {norm:.3g}")
    dos = DensityOfStates(nu, ff, pole_set, gammas, norm)

    lo, hi, count = POSITIVITY_GRID
    grid = dos.pole_set.dominant.sigma * np.logspace(math.log10(lo), math.log10(hi), count)
    vals = dos(grid)
    ratio = float(vals.min() / vals.max())
    if check_positivity and ratio < -positivity_tol:
        raise NegativeDensity(f"rho dips to {ratio:.3g} of its maximum on the check grid")
    object.__setattr__(dos, "min_ratio", ratio)
    return dos


def normalize_dos(dos, verify=True):
    """Raw integral N of the unnormalized density.

    Closed form when available (exponential or constant form factor) and
    quadrature; with ``verify`` the two must agree to 1e-8 relative.
    """
    raw = dos if dos.norm == 1.0 else DensityOfStates(dos.nu, dos.form_factor, dos.pole_set, dos.gammas, 1.0)
    if raw.exponential:
        closed = _exponential_raw_moment(raw.nu, raw.form_factor.b, raw._z, raw.gammas, 0)
    else:
        closed = _constant_closed_norm(raw.nu, raw.residues)
    if not verify:
        return float(closed)
    numeric = raw.fourier(0.0).real
    if abs(closed - numeric) > NORM_RTOL * abs(closed):
        raise NormalizationMismatch(f"closed form {closed!r} vs quadrature {numeric!r}")
    return float(closed)


def eval_dos(dos, E):
    """Normalized density at energies ``E`` (scalar or array, E >= 0)."""
    E = np.asarray(E, dtype=float)
    if np.any(E < 0):
        raise ValueError("the density is defined for E >= 0 only")
    out = dos(E)
    return float(out) if out.ndim == 0 else out


def dos_asymptotic_beta0(dos):
    """beta_0 with rho(E) ~ beta_0 E^nu as E -> 0+."""
    return float(dos.g0 * np.sum(dos._coef / dos._z).real)


@dataclass(frozen=True)
class ConstantFFResidue:
    residue: complex
    norm_residual: float
    finiteness_residual: float
    moment_conditions: tuple
    consistent: bool


def constant_ff_residues(pole, nu, p_max=4):
    """Residue of a lone pole fixed by the constant-form-factor conditions.

    R = -(1/2 pi i) z^nu sin(pi nu) / Im(z^nu e^{i pi nu}).  The moment
    conditions Im(z^p) ~ 0 are reported for p = 0..p_max; they fail for
    every finite width, which is the inconsistency of a lone pole.
    """
    if not 0 < nu < 1:
        raise NuOutOfRange(f"constant form factor requires 0 < nu < 1, got {nu}")
    z = pole.z if isinstance(pole, Pole) else complex(pole)
    zn = complex_power(z, nu)
    denom = (zn * np.exp(1j * math.pi * nu)).imag
    R = -1.0 / (2j * math.pi) * zn * math.sin(math.pi * nu) / denom
    norm_res = 2.0 * (R * np.exp(1j * math.pi * nu)).real + math.sin(math.pi * nu) / math.pi
    fin = (R / zn).real
    scale = math.sin(math.pi * nu) / (2.0 * math.pi * denom)
    conds = tuple(float(scale * (z**p).imag) for p in range(p_max + 1))
    consistent = all(abs(c) <= CONDITION_TOL * max(1.0, abs(z) ** p) for p, c in enumerate(conds))
    return ConstantFFResidue(complex(R), float(norm_res), float(fin), conds, consistent)


def constant_ff_pole_set(poles, nu, weights=None, p_max=0):
    """Residues for several poles satisfying the constant-form-factor conditions.

    Starts from the narrow-resonance guess R_s = i w_s / (2 pi) and applies
    the smallest correction that enforces the normalization condition and
    Re sum z^{p-nu} R = 0 for p = 0..p_max.
    """
    poles = tuple(poles)
    m = len(poles)
    if m < 2:
        raise SingleResonanceConstantFF("the conditions need at least two poles")
    w = np.full(m, 1.0 / m) if weights is None else np.asarray(weights, dtype=float)
    r0 = 1j * w / (2.0 * math.pi)
    z = np.array([p.z for p in poles])
    zn = np.array([complex_power(zz, -nu) for zz in z])
    # unknowns: Re R_s, Im R_s; each condition is Re(sum c_s R_s) = rhs
    rows = [np.exp(1j * math.pi * nu) * np.ones(m)]
    rhs = [-math.sin(math.pi * nu) / (2.0 * math.pi)]
    for p in range(p_max + 1):
        rows.append(z**p * zn)
        rhs.append(0.0)
    A = np.array([np.concatenate([c.real, -c.imag]) for c in rows])
    v0 = np.concatenate([r0.real, r0.imag])
    resid = np.asarray(rhs) - A @ v0
    dv = np.linalg.lstsq(A, resid, rcond=None)[0]
    v = v0 + dv
    R = v[:m] + 1j * v[m:]
    return PoleSet(poles, tuple(R))


def narrow_resonance(x_d, nu=0.5, b_s=1.0, **kwargs):
    """Single narrow pole at sigma = 1 with an exponential form factor b = b_s."""
    return build_dos(PoleSet((Pole(1.0, 2.0 * x_d),)), nu, ExponentialFormFactor(b_s), **kwargs)


def physical_to_dimensionless(re_kev, im_ev, b_s=1.0):
    """Convert a physical pole to (x_s, b in MeV^-1, omega in keV)."""
    pole = Pole.from_physical(re_kev, im_ev)
    b_per_mev = b_s / (pole.sigma * 1e-3)
    return {"x_s": pole.x, "b_per_MeV": b_per_mev, "omega_keV": pole.omega, "sigma_keV": pole.sigma}


def dimensionless_pole_set(pole_set):
    """Rescale energies by sigma_d so the dominant pole sits at Re z = 1."""
    s = pole_set.dominant.sigma
    poles = tuple(Pole(p.sigma / s, p.omega / s) for p in pole_set.poles)
    # residues of rho(E) dE are invariant under E -> E / s
    return PoleSet(poles, pole_set.residues), s
