"""Acceptance gate: the nine package-level criteria, one verdict line each.

Every test prints a single ``[acceptance N] name: PASS/FAIL (details)`` line
so the whole gate can be read at a glance with ``pytest -s``.
"""

import math
import time

import numpy as np
import pytest

from qmsflow.algebra import (
    PhaseState,
    angular_momentum_sq,
    fd_gradient,
    independence_rank,
    integral_set,
    poisson_bracket,
    sl2_realize,
)
from qmsflow.cli import _suite_coords, _suite_green
from qmsflow.coords import from_cartesian
from qmsflow.dynamics import conservation_report, hamiltonian, integrate
from qmsflow.geometry import (
    CATALOG,
    MetricSpec,
    catalog_lookup,
    sample_radii,
    scalar_curvature,
)
from qmsflow.potentials import (
    SystemSpec,
    decomposition_identities,
    green_function,
    kc_potential,
    named_system,
    oscillator_potential,
)


def _verdict(index: int, name: str, ok: bool, detail: str) -> None:
    line = f"[acceptance {index}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def _random_state(rng, n: int) -> PhaseState:
    q = rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], size=n)
    return PhaseState(q, rng.uniform(-2.0, 2.0, n))


# -- 1: the three coalgebra generators close the sl(2, R) brackets -----------

def test_acceptance_1_sl2_closure():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4, 6):
        for _ in range(100):
            s = _random_state(rng, n)
            b = rng.uniform(-3.0, 3.0, n)
            t = sl2_realize(s, b)
            grads = [fd_gradient(fn, s) for fn in (
                lambda st: sl2_realize(st, b).jminus,
                lambda st: sl2_realize(st, b).j3,
                lambda st: sl2_realize(st, b).jplus)]

            def bracket(a, c):
                aq, ap = grads[a]
                cq, cp = grads[c]
                return float(np.dot(aq, cp) - np.dot(cq, ap))

            worst = max(
                worst,
                abs(bracket(1, 2) - 2.0 * t.jplus) / (1.0 + abs(t.jplus)),
                abs(bracket(1, 0) + 2.0 * t.jminus) / (1.0 + abs(t.jminus)),
                abs(bracket(0, 2) - 4.0 * t.j3) / (1.0 + abs(t.j3)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-5 and elapsed < 5.0
    _verdict(1, "sl2-closure N in {2,3,4,6}", ok,
             f"worst rel {worst:.2e} <= 1e-5, {elapsed:.1f}s < 5s")


# -- 2: both integral families are in involution with H and within themselves

def test_acceptance_2_involution():
    n = 4
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = 0.0
    for mid in ("euclidean", "darboux3b", "taub-nut"):
        metric = catalog_lookup(mid)
        for pot in (None, kc_potential(metric, 0.8),
                    oscillator_potential(metric, 0.5)):
            for _ in range(50):
                mu2 = rng.uniform(0.0, 1.0)
                b = rng.uniform(-2.0, 2.0, n)
                sys_spec = SystemSpec(metric, pot, mu2, b=b)
                s = _random_state(rng, n)
                # H, left family C^(2..4), right family C_(2..3)
                funcs = [lambda st: hamiltonian(sys_spec, st)]
                funcs += [lambda st, m=m: integral_set(st, b).left[m]
                          for m in range(n - 1)]
                funcs += [lambda st, m=m: integral_set(st, b).right[m]
                          for m in range(n - 2)]
                values = [fn(s) for fn in funcs]
                grads = [fd_gradient(fn, s) for fn in funcs]
                pairs = ([(0, k) for k in range(1, 2 * n - 2)]        # H vs all
                         + [(1, 2), (1, 3), (2, 3)]                   # left set
                         + [(4, 5)])                                  # right set
                for a, c in pairs:
                    aq, ap = grads[a]
                    cq, cp = grads[c]
                    br = abs(np.dot(aq, cp) - np.dot(cq, ap))
                    worst = max(worst, br / (1.0 + abs(values[a])
                                             + abs(values[c])))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-5 and elapsed < 30.0
    _verdict(2, "involution N=4, 9 system combos x 50 states", ok,
             f"worst rel {worst:.2e} <= 1e-5, {elapsed:.1f}s < 30s")


# -- 3: H with the universal integrals is functionally independent -----------

def test_acceptance_3_functional_independence():
    n = 3
    rng = np.random.default_rng(103)
    metric = catalog_lookup("euclidean")
    b = (1.0, 2.0, 3.0)
    sys_spec = SystemSpec(metric, kc_potential(metric, 1.0), 0.3, b=b)
    funcs = [lambda st: hamiltonian(sys_spec, st),
             lambda st: integral_set(st, b).left[0],    # C^(2)
             lambda st: integral_set(st, b).left[1],    # C^(3)
             lambda st: integral_set(st, b).right[0]]   # C_(2)
    full = sum(independence_rank(funcs, _random_state(rng, n)) == 4
               for _ in range(20))
    ok = full >= 19
    _verdict(3, "rank {H, C^(2), C^(3), C_(2)} = 4 (N=3)", ok,
             f"full rank at {full}/20 states >= 19/20")


# -- 4: named systems conserve everything along the flow ---------------------

def test_acceptance_4_conservation_along_flow():
    cases = [
        ("mic-kepler", {"alpha": 1.0, "mu2": 1.0},
         PhaseState([1.0, 0.3, 0.4], [-0.1, 0.5, 0.2])),
        ("mic-kepler-spherical", {"alpha": 2.0, "mu2": 0.5},
         PhaseState([0.4, 0.0, 0.0], [0.0, 0.8, 0.0])),
        ("mic-kepler-hyperbolic", {"alpha": 2.0, "mu2": 0.5},
         PhaseState([0.4, 0.0, 0.0], [0.0, 0.8, 0.0])),
        ("taub-nut-system", {"m": 1.0, "mu2": 1.0},
         PhaseState([0.8, 0.6, 0.5], [0.2, -0.1, 0.3])),
        ("multifold-kepler", {"nu": 1.5, "a": 1.0, "b": 1.0, "c": 0.3,
                              "d": 0.7, "mu2": 0.5},
         PhaseState([1.0, 0.3, 0.4], [-0.1, 0.4, 0.2])),
    ]
    start = time.perf_counter()
    worst, worst_id = 0.0, ""
    for sid, params, s0 in cases:
        rec = integrate(named_system(sid, params), s0, 20.0)
        assert rec.halted is None, (sid, rec.halted)
        drift = max(v["drift"]
                    for v in conservation_report(rec)["quantities"].values())
        if drift > worst:
            worst, worst_id = drift, sid
    # circular Kepler orbit: period exactly 2 pi
    metric = catalog_lookup("euclidean")
    sys_spec = SystemSpec(metric, kc_potential(metric, 1.0), 0.0, n=3)
    s0 = PhaseState([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    rec = integrate(sys_spec, s0, 2.0 * math.pi)
    ret = max(float(np.abs(rec.final_state.q - s0.q).max()),
              float(np.abs(rec.final_state.p - s0.p).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and ret <= 1e-8 and elapsed < 60.0
    _verdict(4, "conservation over t_end=20, 5 named systems", ok,
             f"worst drift {worst:.2e} ({worst_id}) <= 1e-7, period return "
             f"{ret:.2e} <= 1e-8, {elapsed:.1f}s < 60s")


# -- 5: spherical chart machinery ---------------------------------------------

def test_acceptance_5_coordinate_machinery():
    details = []
    ok = True
    for n in (2, 3, 4):
        report = _suite_coords(n, 42, None)
        ok = ok and report["pass"]
        worst = max(c["max_residual"] for c in report["checks"])
        details.append(f"N={n} worst {worst:.1e}")
    _verdict(5, "canonicity/round-trip/casimir/chain/radial", ok,
             "; ".join(details) + " at tolerances 1e-6/1e-12/1e-10/1e-12/1e-12")


# -- 6: green functions and the intrinsic potentials --------------------------

def test_acceptance_6_green_functions_and_potentials():
    report = _suite_green(3, 42, None)
    harmonic = next(c for c in report["checks"] if c["check"] == "harmonicity")
    affine = next(c for c in report["checks"]
                  if c["check"] == "quadrature-affine-match")
    # the KC and oscillator constructors against independently evaluated
    # closed forms, 32 points per catalog row
    worst = 0.0
    for mid in CATALOG:
        metric = catalog_lookup(mid)
        kc = kc_potential(metric, 1.3)
        osc = oscillator_potential(metric, 0.7)
        for r in sample_radii(metric.domain, 32):
            u = green_function(metric, float(r))
            worst = max(worst, abs(kc.u(float(r)) - 1.3 * u)
                        / (1.0 + abs(1.3 * u)))
        for r in sample_radii(osc.domain, 32):
            u = green_function(metric, float(r))
            expected = 0.7 / (u * u)
            worst = max(worst, abs(osc.u(float(r)) - expected)
                        / (1.0 + abs(expected)))
    ok = harmonic["pass"] and affine["pass"] and worst <= 1e-12
    _verdict(6, "harmonicity/quadrature-affine/constructor columns", ok,
             f"harmonicity {harmonic['max_residual']:.1e} <= 1e-7, affine "
             f"{affine['max_residual']:.1e} <= 1e-8, columns {worst:.1e} "
             f"<= 1e-12")


# -- 7: decomposition identities ----------------------------------------------

def test_acceptance_7_decomposition_identities():
    rng = np.random.default_rng(107)
    worst = 0.0
    names = set()
    for _ in range(20):
        r = rng.uniform(0.3, 0.9) if rng.random() < 0.5 else rng.uniform(1.1, 3.0)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        point = PhaseState(r * direction, rng.uniform(-2.0, 2.0, 3))
        out = decomposition_identities(point, {
            "nu": float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])),
            "a": rng.uniform(0.5, 2.0), "b": rng.uniform(0.5, 2.0),
            "c": rng.uniform(-1.0, 1.0), "d": rng.uniform(-1.0, 1.0),
            "m": rng.uniform(0.5, 2.0), "mu2": rng.uniform(0.0, 2.0),
            "beta": rng.uniform(-1.0, 1.0), "gamma": rng.uniform(-1.0, 1.0)})
        names.update(out)
        worst = max(worst, max(out.values()))
    ok = worst <= 1e-10 and len(names) >= 5
    _verdict(7, "multifold/oscillator-shift/reduction identities", ok,
             f"{len(names)} identities x 20 points, worst {worst:.1e} <= 1e-10")


# -- 8: centrifugal terms break rotational symmetry, coalgebra survives -------

def _jplus_lsq_bracket_closed_form(sph, b) -> float:
    """Closed form of the bracket of J+ with the total squared angular
    momentum: differentiating the angular centrifugal part W of C_(N) gives

        (4/r^2) sum_m (p_theta_m / S_m) [ b_m tan(theta_m) / (cos^2 theta_m S_m)
            - cot(theta_m) ( sum_{j>m} b_j / (cos^2 theta_j S_j) + b_N / S_N ) ]

    with S_m the product of sin^2 theta_k for k < m.
    """
    n = len(b)
    theta, p_theta = sph.theta, sph.p_theta
    s_prod = np.ones(n)
    for j in range(1, n):
        s_prod[j] = s_prod[j - 1] * math.sin(theta[j - 1]) ** 2
    total = 0.0
    for m in range(n - 1):
        tail = sum(b[j] / (math.cos(theta[j]) ** 2 * s_prod[j])
                   for j in range(m + 1, n - 1))
        tail += b[n - 1] / s_prod[n - 1]
        term = (b[m] * math.tan(theta[m])
                / (math.cos(theta[m]) ** 2 * s_prod[m])
                - tail / math.tan(theta[m]))
        total += (p_theta[m] / s_prod[m]) * term
    return 4.0 / sph.r ** 2 * total


def test_acceptance_8_symmetry_breaking_signature():
    metric = catalog_lookup("darboux3b")
    potential = kc_potential(metric, 0.7)

    # with b = 0 the total angular momentum is conserved along the flow
    free_b = SystemSpec(metric, potential, 0.4, n=3)
    rec = integrate(free_b, PhaseState([1.0, 0.3, 0.4], [0.3, -0.4, 0.5]),
                    20.0)
    lsq = np.array([angular_momentum_sq(s) for s in rec.states])
    lsq_drift = float(np.abs(lsq - lsq[0]).max() / (1.0 + abs(lsq[0])))

    # documented state with every b_i nonzero: L^2 is visibly not conserved
    # while the top right-family integral still is
    b = (0.8, 0.5, 0.3)
    broken = SystemSpec(metric, potential, 0.4, b=b)
    state = PhaseState([1.0, 0.7, 0.6], [0.3, -0.4, 0.5])
    h_fun = lambda st: hamiltonian(broken, st)
    lsq_bracket = abs(poisson_bracket(h_fun, angular_momentum_sq, state))
    top = lambda st: integral_set(st, b).right[-1]
    cn_bracket = abs(poisson_bracket(h_fun, top, state)) / (
        1.0 + abs(h_fun(state)) + abs(top(state)))

    # the bracket of J+ with L^2 matches its closed form
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(20):
        s = _random_state(rng, 3)
        rb = rng.uniform(0.3, 2.0, 3)
        jp = lambda st: sl2_realize(st, rb).jplus
        numeric = poisson_bracket(jp, angular_momentum_sq, s)
        closed = _jplus_lsq_bracket_closed_form(from_cartesian(s), rb)
        worst = max(worst, abs(numeric - closed) / (1.0 + abs(closed)))

    ok = (lsq_drift <= 1e-7 and lsq_bracket > 1e-3 and cn_bracket <= 1e-5
          and worst <= 1e-5)
    _verdict(8, "symmetry breaking by centrifugal terms", ok,
             f"b=0 L^2 drift {lsq_drift:.1e} <= 1e-7; {{H,L^2}} = "
             f"{lsq_bracket:.3f} > 1e-3 while {{H,C_(N)}} {cn_bracket:.1e} "
             f"<= 1e-5; {{J+,L^2}} closed form worst {worst:.1e} <= 1e-5")


# -- 9: scalar curvature of the conformal metric ------------------------------

def test_acceptance_9_scalar_curvature():
    flat = MetricSpec.from_source("1", id="flat")
    worst_flat = max(abs(scalar_curvature(flat, float(r), n))
                     for n in (2, 3, 4, 6)
                     for r in sample_radii(flat.domain, 32))
    worst_rel = 0.0
    for kappa, source, domain in ((1.0, "2/(1 + r^2)", (0.0, math.inf)),
                                  (-1.0, "2/(1 - r^2)", (0.0, 1.0))):
        metric = MetricSpec.from_source(source, id="const-curv", domain=domain)
        for n in (2, 3, 4, 6):
            expected = n * (n - 1) * kappa
            for r in sample_radii(metric.domain, 32):
                err = abs(scalar_curvature(metric, float(r), n) - expected)
                worst_rel = max(worst_rel, err / (1.0 + abs(expected)))
    ok = worst_flat <= 1e-9 and worst_rel <= 1e-9
    _verdict(9, "curvature: 0 for f=1, N(N-1)kappa for stereographic f", ok,
             f"flat worst {worst_flat:.1e} <= 1e-9, constant-curvature worst "
             f"rel {worst_rel:.1e} <= 1e-9")
