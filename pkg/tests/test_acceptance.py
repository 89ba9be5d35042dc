"""The ten acceptance criteria, each at its stated tolerance.

One PASS/FAIL line per criterion is printed in the terminal summary (and
when the module is run as a script).
"""

import cmath
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from decaykit.autocorr import autocorr_curve, default_y_grid, discrete_spectrum, wk_forward
from decaykit.dos import ExponentialFormFactor, Pole, PoleSet, build_dos, dos_asymptotic_beta0, narrow_resonance, physical_to_dimensionless
from decaykit.moments import decomposed_taylor, moment_table, negative_variance_intervals, taylor_p_raw
from decaykit.regions import (
    TransitionConstant,
    eta_ratio,
    exponential_probability_direct,
    exponential_probability_full,
    m_function,
    multi_pole_modulation,
    piecewise_P,
    region_boundaries,
    table1,
)
from decaykit.special import complex_power, upper_incomplete_gamma
from decaykit.survival import amplitude, amplitude_decomposed, survival_probability

from published_values import BE8_B_PER_MEV, BE8_PERIOD_LIFETIMES, BE8_X, TABLE1, VARIANCE_BE8, VARIANCE_X01

RESULTS = {}
SWEEP = [(x, b, nu) for x in (1e-3, 1e-2, 0.1) for b in (0.65, 1.0, 2.0) for nu in (0.25, 0.5, 1.0)]


def relerr(a, b):
    return abs(a - b) / abs(b)


def record(number, title, checks):
    """checks: list of (label, ok, detail)."""
    ok = all(c[1] for c in checks)
    failed = [f"{label}: {detail}" for label, good, detail in checks if not good]
    summary = "; ".join(failed) if failed else "; ".join(f"{label}: {detail}" for label, _, detail in checks)
    RESULTS[number] = (ok, f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title} -- {summary}")
    assert ok, RESULTS[number][1]


def test_criterion_01_table1():
    start = time.perf_counter()
    rows = table1(b_s=2.0, nu=0.5, x_grid=[r[0] for r in TABLE1])
    elapsed = time.perf_counter() - start
    worst = {"tau_G": 0.0, "tau_cs": 0.0, "osc": 0.0, "n_G": 0.0}
    for row, ref in zip(rows, TABLE1):
        worst["tau_G"] = max(worst["tau_G"], relerr(row.tau_G, ref[1]))
        worst["tau_cs"] = max(worst["tau_cs"], relerr(row.tau_cs, ref[2]) if not row.root_missing else math.inf)
        # 4 pi x_d is exact; compare with the printed value at its printed precision
        worst["osc"] = max(worst["osc"], relerr(float(f"{row.tau_osc:.4g}"), ref[3]))
        worst["n_G"] = max(worst["n_G"], relerr(row.n_G, ref[4]))
    record(1, "Critical-time table", [
        ("tau_G", worst["tau_G"] < 5e-3, f"max rel {worst['tau_G']:.2e}"),
        ("tau_cs", worst["tau_cs"] < 1e-2, f"max rel {worst['tau_cs']:.2e}"),
        ("4 pi x_d", worst["osc"] == 0.0, f"max rel {worst['osc']:.1e}"),
        ("n_G", worst["n_G"] < 1e-2, f"max rel {worst['n_G']:.2e}"),
        ("runtime", elapsed < 60.0, f"{elapsed:.2f} s"),
    ])


def test_criterion_02_variance_intervals():
    (lo, hi), = negative_variance_intervals(0.1, 0.5)
    x_be = physical_to_dimensionless(92.0, 2.8)["x_s"]
    (blo, bhi), = negative_variance_intervals(x_be, 0.5)
    record(2, "Variance-sign intervals", [
        ("x=0.1 lower", relerr(lo, VARIANCE_X01[0]) < 0.02, f"{lo:.4g} vs {VARIANCE_X01[0]}"),
        ("x=0.1 upper", relerr(hi, VARIANCE_X01[1]) < 0.02, f"{hi:.4g} vs {VARIANCE_X01[1]} ({relerr(hi, VARIANCE_X01[1]):.1%} off)"),
        ("Be8 upper", relerr(bhi, VARIANCE_BE8[1]) < 0.05, f"{bhi:.4g} vs {VARIANCE_BE8[1]}"),
        ("Be8 lower", abs(math.log10(blo / VARIANCE_BE8[0])) < 1.0, f"{blo:.3g} vs {VARIANCE_BE8[0]}"),
    ])


def test_criterion_03_be8_kinematics():
    conv = physical_to_dimensionless(92.0, 2.8, 1.0)
    period = 4.0 * math.pi * conv["x_s"]
    record(3, "8Be kinematics", [
        ("x_s", relerr(conv["x_s"], BE8_X) < 0.02, f"{conv['x_s']:.4g}"),
        ("period", relerr(period, BE8_PERIOD_LIFETIMES) < 0.02,
         f"{period:.4g} lifetimes vs {BE8_PERIOD_LIFETIMES} ({relerr(period, BE8_PERIOD_LIFETIMES):.1%} off)"),
        ("b", relerr(conv["b_per_MeV"], BE8_B_PER_MEV) < 5e-3, f"{conv['b_per_MeV']:.4g} per MeV"),
    ])


def test_criterion_04_route_equivalence():
    tau = np.linspace(0.0, 30.0, 50)
    worst_closed = worst_split = 0.0
    for x, b, nu in SWEEP:
        dos = narrow_resonance(x, nu, b)
        for t in tau / dos.pole_set.dominant.omega:
            q = amplitude(dos, t, "quadrature")
            worst_closed = max(worst_closed, abs(amplitude(dos, t, "closed_form") - q))
            br = amplitude_decomposed(dos, t)
            worst_split = max(worst_split, abs(br.exponential + br.nonexponential - q))
    record(4, "Route equivalence", [
        ("closed vs quadrature", worst_closed < 1e-8, f"max {worst_closed:.2e}"),
        ("A_e + A_ne vs A", worst_split < 1e-7, f"max {worst_split:.2e}"),
    ])


def test_criterion_05_wiener_khinchin():
    dos = narrow_resonance(0.1, 0.5, 1.0)
    ac = autocorr_curve(dos, default_y_grid(dos))
    t = np.linspace(0.0, 60.0, 30)
    P = survival_probability(dos, t=t).P
    wk = max(abs(wk_forward(ac, v) - p) for v, p in zip(t, P))
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(1, 6):
        E = rng.uniform(0.0, 5.0, k)
        w = rng.uniform(0.1, 1.0, k)
        w /= w.sum()
        for tt in np.linspace(0.0, 10.0, 21):
            P_d, terms = discrete_spectrum(list(zip(E, w)), tt)
            brute = abs(np.sum(w * np.exp(-1j * E * tt))) ** 2
            worst = max(worst, abs(P_d - brute), abs(sum(c * math.cos(o * tt) for o, c in terms) - brute))
    record(5, "Wiener-Khinchin roundtrip", [
        ("forward", wk < 1e-3, f"max {wk:.2e}"),
        ("discrete", worst < 1e-12, f"max {worst:.2e}"),
    ])


def test_criterion_06_power_law():
    checks = []
    for nu in (0.25, 0.5, 1.0):
        dos = narrow_resonance(0.1, nu, 1.0)
        n0 = 3.0 * region_boundaries(dos).n_cl
        c = survival_probability(dos, n=np.linspace(n0, n0 + 1.0, 65)[:-1])
        ratio = np.mean(c.P * c.t ** (2 * nu + 2) / (dos_asymptotic_beta0(dos) ** 2 * math.gamma(nu + 1) ** 2))
        checks.append((f"nu={nu}", 0.99 <= ratio <= 1.01, f"{ratio:.5f}"))
    record(6, "Large-time power law", checks)


def test_criterion_07_evenness():
    dos = narrow_resonance(0.1, 0.5, 1.0)
    table = moment_table(dos, 4)
    p1 = abs(taylor_p_raw(table, 1)) / abs(table.values[1])
    p3 = abs(taylor_p_raw(table, 3)) / abs(table.values[3])
    parts = decomposed_taylor(dos, order=1)
    lin_e = parts["P_e"][1]
    total = parts["P_e"][1] + parts["P_ne"][1] + parts["P_i"][1]
    record(7, "Evenness suite", [
        ("p1", p1 < 1e-12, f"{p1:.1e}"),
        ("p3", p3 < 1e-12, f"{p3:.1e}"),
        ("P_e linear", abs(lin_e) > 1e-6, f"{lin_e:.4g}"),
        ("sum", abs(total) < 1e-10, f"{total:.1e}"),
    ])


def test_criterion_08_first_oscillation():
    checks = []
    for x in (1e-3, 1e-2):
        dos = narrow_resonance(x, 0.5, 1.0)
        rep = region_boundaries(dos)
        one = survival_probability(dos, n=[1.0])
        ratio = abs(one.A_ne[0] / one.A_e[0])
        n = np.linspace(0.0, 1.0, 52)[1:-1]
        P = survival_probability(dos, n=n).P
        rms = math.sqrt(np.mean((np.array([piecewise_P(v, rep) for v in n]) / P - 1.0) ** 2))
        checks.append((f"x={x:g} ratio", ratio < 0.05, f"{ratio:.2e}"))
        checks.append((f"x={x:g} small-time rms", rms < 0.02, f"{rms:.1e}"))
    record(8, "First-oscillation transition", checks)


def test_criterion_09_special_functions():
    pts = json.loads((Path(__file__).parent / "data" / "gamma_oracle.json").read_text())["points"]
    g = p = rec = 0.0
    for pt in pts:
        a, z = pt["a"], complex(*pt["z"])
        ref = complex(float(pt["gamma"][0]), float(pt["gamma"][1]))
        g = max(g, relerr(upper_incomplete_gamma(a, z), ref))
        pref = complex(float(pt["power"][0]), float(pt["power"][1]))
        p = max(p, relerr(complex_power(z, a), pref))
        g1 = upper_incomplete_gamma(a + 1, z)
        rhs = g1 - complex_power(z, a) * cmath.exp(-z)
        rec = max(rec, abs(a * upper_incomplete_gamma(a, z) - rhs) / max(abs(rhs), abs(g1)))
    record(9, "Special functions", [
        ("grid size", len(pts) >= 100, f"{len(pts)} points"),
        ("Gamma(a,z)", g < 1e-12, f"max rel {g:.1e}"),
        ("z^a", p < 1e-12, f"max rel {p:.1e}"),
        ("recurrence", rec < 1e-12, f"max rel {rec:.1e}"),
    ])


def test_criterion_10_appendix_checks():
    x, nu = 0.1, 0.5
    rep = region_boundaries(narrow_resonance(x, nu, 1.0))
    C = TransitionConstant(rep.C)
    tol = 1e-6
    below = eta_ratio(rep.n_cl * (1 - tol), C, x, nu)
    above = eta_ratio(rep.n_cl * (1 + tol), C, x, nu)
    flips = below > 1 / below and above < 1 / above
    # extrema of m on a fine grid about each predicted location
    n_min = (nu + 1) / (2 * math.pi * x)
    grid = np.linspace(n_min * 0.99, n_min * 1.01, 200001)
    arg_min = grid[np.argmin(m_function(grid, C, x, nu))]
    min_step = grid[1] - grid[0]
    grid = np.linspace(rep.n_cl * 0.99, rep.n_cl * 1.01, 200001)
    arg_max = grid[np.argmax(m_function(grid, C, x, nu))]
    step = grid[1] - grid[0]
    ps = PoleSet((Pole(1.0, 0.01), Pole(1.05, 0.03), Pole(1.3, 0.05)))
    dos = build_dos(ps, 0.5, ExponentialFormFactor(1.0))
    t = np.linspace(0.0, 300.0, 301)
    ident = np.max(np.abs(exponential_probability_full(dos, t) - exponential_probability_direct(dos, t)))
    M = multi_pole_modulation(dos, [0.0, 5.0])
    record(10, "Appendix checks", [
        ("eta ordering flips at n_cl", flips, f"n_cl = {rep.n_cl:.6f}"),
        ("m minimum", abs(arg_min - n_min) <= min_step, f"{arg_min:.6f} vs {n_min:.6f}"),
        ("m maximum", abs(arg_max - rep.n_cl) <= step, f"{arg_max:.6f} vs {rep.n_cl:.6f}"),
        ("M full-sum identity", ident < 1e-12 and M.M_full.shape == (2,), f"max {ident:.1e}"),
    ])


if __name__ == "__main__":
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion")):
        try:
            fn()
        except AssertionError:
            pass
    for k in sorted(RESULTS):
        print(RESULTS[k][1])
