"""Command-line interface: catalog inspection, simulation, verification.

Commands
--------
``catalog list``
    All built-in space ids, one per line.
``catalog show ID``
    Warp factor, domain, parameters, green function and the derived
    potential/monopole/centrifugal formulas for one space.
``simulate --config PATH [--out DIR]``
    Integrate the configured system.  Writes ``trajectory.csv`` (time,
    coordinates, momenta, energy and the universal integrals, 17 significant
    digits per value) and ``summary.json`` (conservation drifts) into the
    output directory.
``verify SUITE [--config PATH] [--seed U64] [--tol FLOAT] [--out DIR]``
    Run one of the self-verification suites (brackets, involution,
    independence, coords, identities, green) and print a JSON report.

Exit codes: 0 success, 1 verification failure, 2 configuration error
(including bad command lines and invalid initial states), 3 integration
failure (the partial trajectory and summary are still written).

Configuration files are YAML; unknown keys anywhere in the file are errors.
All randomness in the verify suites derives from the single seed through
per-check spawned streams of a counter-based generator (Philox), so reports
are byte-identical across runs given the same config and seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np
import yaml

from .algebra import (
    PhaseState,
    SingularStateError,
    fd_gradient,
    independence_rank,
    integral_set,
    poisson_bracket,
    sl2_realize,
    so_n_generator,
)
from .coords import (
    ChartError,
    SphericalPhaseState,
    angular_chain,
    from_cartesian,
    radial_hamiltonian,
    spherical_casimir,
    to_cartesian,
)
from .dynamics import conservation_report, hamiltonian, integrate
from .exprlang import ExprError
from .geometry import (
    CATALOG,
    DomainViolation,
    MetricError,
    MetricSpec,
    catalog_lookup,
    sample_radii,
)
from .potentials import (
    PotentialError,
    PotentialSpec,
    SystemSpec,
    catalog_green_form,
    decomposition_identities,
    green_function,
    kc_potential,
    named_system,
    oscillator_potential,
)

__all__ = ["ConfigError", "RunConfig", "build_config", "load_config", "main",
           "VERIFY_SUITES"]

VERIFY_SUITES = ("brackets", "involution", "independence", "coords",
                 "identities", "green")


class ConfigError(ValueError):
    """A configuration file or command line is malformed or inconsistent."""


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

_MISSING = object()


class _Section:
    """Mapping view that tracks consumed keys; leftovers are errors."""

    def __init__(self, node, where: str):
        if node is None:
            node = {}
        if not isinstance(node, dict):
            raise ConfigError(f"{where} must be a mapping, got {node!r}")
        self._data = dict(node)
        self.where = where

    def has(self, key: str) -> bool:
        return key in self._data

    def take(self, key: str, default=_MISSING):
        if key in self._data:
            return self._data.pop(key)
        if default is _MISSING:
            raise ConfigError(f"{self.where}: missing required key '{key}'")
        return default

    def rest(self) -> dict:
        out, self._data = self._data, {}
        return out

    def close(self) -> None:
        if self._data:
            names = ", ".join(sorted(map(str, self._data)))
            raise ConfigError(f"{self.where}: unknown key(s): {names}")


def _as_float(value, where: str) -> float:
    # PyYAML resolves dot-less exponent literals such as 1e-10 as strings
    # (the YAML 1.1 float pattern requires a dot), so numeric strings count.
    if isinstance(value, bool):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{where} must be a number, got {value!r}")


def _as_int(value, where: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value, 10)
        except ValueError:
            pass
    raise ConfigError(f"{where} must be an integer, got {value!r}")


def _as_str(value, where: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where} must be a string, got {value!r}")
    return value


def _as_vector(value, where: str, length: int | None = None) -> list:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{where} must be a list of numbers, got {value!r}")
    vec = [_as_float(v, f"{where}[{i}]") for i, v in enumerate(value)]
    if length is not None and len(vec) != length:
        raise ConfigError(f"{where} must have length {length}, got {len(vec)}")
    return vec


def _param_map(node, where: str) -> dict:
    """Parameter bindings; integers stay exact (some, like nu, are used as
    rationals), everything else becomes a float."""
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(f"{where} must be a mapping, got {node!r}")
    out = {}
    for key, value in node.items():
        name = _as_str(key, where)
        if isinstance(value, int) and not isinstance(value, bool):
            out[name] = value
        else:
            out[name] = _as_float(value, f"{where}.{name}")
    return out


def _as_domain(node, where: str) -> tuple[float, float]:
    pair = _as_vector(node, where, length=2)
    lo, hi = pair
    if not lo < hi:
        raise ConfigError(f"{where} must satisfy lo < hi, got ({lo}, {hi})")
    return lo, hi


def _build_metric(node) -> MetricSpec:
    sec = _Section(node, "space")
    if sec.has("id") and not sec.has("f"):
        mid = _as_str(sec.take("id"), "space.id")
        params = _param_map(sec.take("params", None), "space.params")
        sec.close()
        try:
            return catalog_lookup(mid, params)
        except MetricError as exc:
            raise ConfigError(str(exc)) from exc
    source = _as_str(sec.take("f"), "space.f")
    mid = _as_str(sec.take("id", "custom"), "space.id")
    params = _param_map(sec.take("params", None), "space.params")
    domain = (0.0, math.inf)
    if sec.has("domain"):
        domain = _as_domain(sec.take("domain"), "space.domain")
    sec.close()
    try:
        return MetricSpec.from_source(source, params=params, domain=domain,
                                      id=mid)
    except (ExprError, MetricError, ValueError) as exc:
        raise ConfigError(f"space.f: {exc}") from exc


_POTENTIAL_KINDS = ("kc", "oscillator", "shifted-oscillator", "custom",
                    "named-system")


def _potential_clause(node):
    """Split the potential entry into (kind, section); kind 'none' has no
    section.  Exactly one clause must be present."""
    if node is None or node == "none":
        return "none", None
    if isinstance(node, str):
        raise ConfigError(
            f"potential: unknown kind {node!r} (use 'none' or one of: "
            + ", ".join(_POTENTIAL_KINDS) + ")")
    if not isinstance(node, dict) or len(node) != 1:
        raise ConfigError(
            "potential must be 'none' or a mapping with exactly one clause")
    kind, body = next(iter(node.items()))
    if kind not in _POTENTIAL_KINDS:
        raise ConfigError(
            f"potential: unknown kind {kind!r} (use 'none' or one of: "
            + ", ".join(_POTENTIAL_KINDS) + ")")
    return kind, _Section(body, f"potential.{kind}")


def _build_potential(kind: str, clause, metric: MetricSpec):
    if kind == "none":
        return None
    try:
        if kind == "kc":
            alpha = _as_float(clause.take("alpha"), "potential.kc.alpha")
            clause.close()
            return kc_potential(metric, alpha)
        if kind == "oscillator":
            beta = _as_float(clause.take("beta"), "potential.oscillator.beta")
            clause.close()
            return oscillator_potential(metric, beta)
        if kind == "shifted-oscillator":
            beta = _as_float(clause.take("beta"),
                             "potential.shifted-oscillator.beta")
            gamma = _as_float(clause.take("gamma"),
                              "potential.shifted-oscillator.gamma")
            clause.close()
            return oscillator_potential(metric, beta, gamma)
        # custom
        source = _as_str(clause.take("u"), "potential.custom.u")
        params = _param_map(clause.take("params", None),
                            "potential.custom.params")
        domain = (0.0, math.inf)
        if clause.has("domain"):
            domain = _as_domain(clause.take("domain"),
                                "potential.custom.domain")
        clause.close()
        return PotentialSpec.from_expr(source, params=params, domain=domain)
    except (ExprError, PotentialError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"potential.{kind}: {exc}") from exc


def _build_initial(node) -> PhaseState:
    sec = _Section(node, "initial")
    if sec.has("cartesian") == sec.has("spherical"):
        raise ConfigError(
            "initial must contain exactly one of 'cartesian' or 'spherical'")
    if sec.has("cartesian"):
        cart = _Section(sec.take("cartesian"), "initial.cartesian")
        q = _as_vector(cart.take("q"), "initial.cartesian.q")
        p = _as_vector(cart.take("p"), "initial.cartesian.p", length=len(q))
        cart.close()
        sec.close()
        try:
            return PhaseState(q, p)
        except ValueError as exc:
            raise ConfigError(f"initial.cartesian: {exc}") from exc
    sph = _Section(sec.take("spherical"), "initial.spherical")
    r = _as_float(sph.take("r"), "initial.spherical.r")
    theta = _as_vector(sph.take("theta"), "initial.spherical.theta")
    p_r = _as_float(sph.take("p_r"), "initial.spherical.p_r")
    p_theta = _as_vector(sph.take("p_theta"), "initial.spherical.p_theta",
                         length=len(theta))
    sph.close()
    sec.close()
    try:
        return to_cartesian(SphericalPhaseState(r, theta, p_r, p_theta))
    except (ChartError, ValueError) as exc:
        raise ConfigError(f"initial.spherical: {exc}") from exc


class RunConfig:
    """A fully validated run: system, initial state, integrator settings."""

    def __init__(self, system: SystemSpec, initial: PhaseState, t_end: float,
                 method: str = "adaptive", rtol: float = 1e-10,
                 atol: float = 1e-12, step: float = 1e-3, samples: int = 201,
                 seed: int = 42, outdir: str | None = None):
        self.system = system
        self.initial = initial
        self.t_end = t_end
        self.method = method
        self.rtol = rtol
        self.atol = atol
        self.step = step
        self.samples = samples
        self.seed = seed
        self.outdir = outdir


def build_config(data) -> RunConfig:
    """Validate a parsed configuration mapping and assemble the run."""
    top = _Section(data, "config")
    dimension = top.take("dimension", None)
    space_node = top.take("space", None)
    potential_node = top.take("potential")
    mu2_node = top.take("mu2", None)
    b_node = top.take("b", None)
    initial_node = top.take("initial")
    integ_node = top.take("integrator", None)
    t_end = _as_float(top.take("t_end"), "t_end")
    samples = _as_int(top.take("samples", 201), "samples")
    seed = _as_int(top.take("seed", 42), "seed")
    output_node = top.take("output", None)
    top.close()

    if dimension is not None:
        dimension = _as_int(dimension, "dimension")
    state0 = _build_initial(initial_node)

    kind, clause = _potential_clause(potential_node)
    if kind == "named-system":
        for key, value in (("space", space_node), ("mu2", mu2_node),
                           ("b", b_node)):
            if value is not None:
                raise ConfigError(
                    f"potential.named-system defines the whole system; "
                    f"remove the '{key}' key")
        sid = _as_str(clause.take("id"), "potential.named-system.id")
        params = {}
        for key, value in clause.rest().items():
            name = _as_str(key, "potential.named-system")
            where = f"potential.named-system.{name}"
            if name == "centrifugal":
                params[name] = _as_vector(value, where)
            elif name == "n":
                params[name] = _as_int(value, where)
            elif isinstance(value, int) and not isinstance(value, bool):
                params[name] = value
            else:
                params[name] = _as_float(value, where)
        if dimension is not None:
            if "n" in params and params["n"] != dimension:
                raise ConfigError(
                    f"dimension = {dimension} conflicts with "
                    f"potential.named-system.n = {params['n']}")
            params["n"] = dimension
        try:
            system = named_system(sid, params)
        except PotentialError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        if space_node is None:
            raise ConfigError("config: missing required key 'space'")
        metric = _build_metric(space_node)
        potential = _build_potential(kind, clause, metric)
        mu2 = 0.0 if mu2_node is None else _as_float(mu2_node, "mu2")
        b = None if b_node is None else _as_vector(b_node, "b")
        sizes = {"initial state": state0.n}
        if dimension is not None:
            sizes["dimension"] = dimension
        if b is not None:
            sizes["b"] = len(b)
        if len(set(sizes.values())) > 1:
            detail = ", ".join(f"{k}: {v}" for k, v in sizes.items())
            raise ConfigError(f"inconsistent dimensions ({detail})")
        try:
            system = SystemSpec(metric, potential, mu2, b=b, n=state0.n)
        except PotentialError as exc:
            raise ConfigError(str(exc)) from exc

    if system.n != state0.n:
        raise ConfigError(f"initial state has dimension {state0.n} but the "
                          f"system has dimension {system.n}")

    integ = _Section(integ_node, "integrator")
    method = _as_str(integ.take("method", "adaptive"), "integrator.method")
    if method not in ("adaptive", "midpoint"):
        raise ConfigError(
            f"integrator.method must be 'adaptive' or 'midpoint', "
            f"got {method!r}")
    rtol = _as_float(integ.take("rtol", 1e-10), "integrator.rtol")
    atol = _as_float(integ.take("atol", 1e-12), "integrator.atol")
    step = _as_float(integ.take("step", 1e-3), "integrator.step")
    integ.close()
    for name, value in (("integrator.rtol", rtol), ("integrator.atol", atol),
                        ("integrator.step", step), ("t_end", t_end)):
        if not value > 0.0:
            raise ConfigError(f"{name} must be positive, got {value}")
    if samples < 2:
        raise ConfigError(f"samples must be >= 2, got {samples}")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(
            f"seed must fit in an unsigned 64-bit integer, got {seed}")

    out = _Section(output_node, "output")
    outdir = out.take("directory", None)
    if outdir is not None:
        outdir = _as_str(outdir, "output.directory")
    out.close()

    # the initial state must be valid for the system (inside the metric and
    # potential domains, off every centrifugal axis)
    try:
        hamiltonian(system, state0)
    except (DomainViolation, ValueError) as exc:
        raise ConfigError(f"initial state invalid: {exc}") from exc

    return RunConfig(system, state0, t_end, method=method, rtol=rtol,
                     atol=atol, step=step, samples=samples, seed=seed,
                     outdir=outdir)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path!r}: {exc}") from exc
    if data is None:
        raise ConfigError(f"config {path!r} is empty")
    return build_config(data)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True,
                      default=_json_default) + "\n"


def _trajectory_columns(n: int) -> list:
    return (["t"]
            + [f"q{i}" for i in range(1, n + 1)]
            + [f"p{i}" for i in range(1, n + 1)]
            + ["H"]
            + [f"Cl{m}" for m in range(2, n + 1)]
            + [f"Cr{m}" for m in range(2, n)])


def _write_trajectory_csv(path: str, record, n: int) -> None:
    series = record.series()
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(_trajectory_columns(n)) + "\n")
        for k, t in enumerate(record.times):
            state = record.states[k]
            row = [t, *state.q, *state.p, series["H"][k]]
            row += [series[f"Cl{m}"][k] for m in range(2, n + 1)]
            row += [series[f"Cr{m}"][k] for m in range(2, n)]
            handle.write(",".join("%.17g" % v for v in row) + "\n")


# --------------------------------------------------------------------------
# verification suites
# --------------------------------------------------------------------------

def _spawn(seed: int, count: int) -> list:
    """One independent Philox stream per check: adding a check never shifts
    the draws of the others, and reports stay reproducible bit for bit."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _random_state(rng, n: int, pmax: float = 2.0) -> PhaseState:
    # components bounded away from zero so finite-difference stencils never
    # straddle a centrifugal axis
    q = rng.uniform(0.5, 1.5, n) * rng.choice([-1.0, 1.0], size=n)
    return PhaseState(q, rng.uniform(-pmax, pmax, n))


def _random_spherical(rng, n: int) -> SphericalPhaseState:
    # angles keep both sin and cos away from zero
    theta = rng.uniform(0.4, 1.15, n - 1)
    return SphericalPhaseState(rng.uniform(0.6, 2.0), theta,
                               rng.uniform(-2.0, 2.0),
                               rng.uniform(-2.0, 2.0, n - 1))


def _check_entry(name: str, points: int, worst: float, tol: float) -> dict:
    return {"check": name, "points": int(points),
            "max_residual": float(worst), "tolerance": float(tol),
            "pass": bool(worst <= tol)}


def _report(suite: str, seed: int, n: int, checks: list) -> dict:
    return {"suite": suite, "seed": int(seed), "dimension": int(n),
            "checks": checks, "pass": all(c["pass"] for c in checks)}


def _integral_functions(sys_spec: SystemSpec):
    """Hamiltonian plus the independent universal integrals as callables:
    C^(2)..C^(N) from the left family, C_(2)..C_(N-1) from the right (the
    top right member coincides with the top left one)."""
    n, b = sys_spec.n, sys_spec.b
    funcs = [lambda st: hamiltonian(sys_spec, st)]
    funcs += [lambda st, m=m: integral_set(st, b).left[m]
              for m in range(n - 1)]
    funcs += [lambda st, m=m: integral_set(st, b).right[m]
              for m in range(n - 2)]
    return funcs


def _suite_brackets(n: int, seed: int, tol: float | None) -> dict:
    tol = 1e-5 if tol is None else tol
    rng_sl2, rng_son = _spawn(seed, 2)
    worst = 0.0
    for _ in range(100):
        s = _random_state(rng_sl2, n)
        b = rng_sl2.uniform(-3.0, 3.0, n)
        t = sl2_realize(s, b)
        jm = lambda st: sl2_realize(st, b).jminus
        j3 = lambda st: sl2_realize(st, b).j3
        jp = lambda st: sl2_realize(st, b).jplus
        worst = max(
            worst,
            abs(poisson_bracket(j3, jp, s) - 2.0 * t.jplus)
            / (1.0 + abs(t.jplus)),
            abs(poisson_bracket(j3, jm, s) + 2.0 * t.jminus)
            / (1.0 + abs(t.jminus)),
            abs(poisson_bracket(jm, jp, s) - 4.0 * t.j3) / (1.0 + abs(t.j3)))
    checks = [_check_entry("sl2-closure", 300, worst, tol)]

    def rot(i, j):
        return lambda st: so_n_generator(i, j, st)

    worst, points = 0.0, 0
    for _ in range(20):
        s = _random_state(rng_son, n)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    jjk = so_n_generator(j, k, s)
                    jik = so_n_generator(i, k, s)
                    jij = so_n_generator(i, j, s)
                    worst = max(
                        worst,
                        abs(poisson_bracket(rot(i, j), rot(i, k), s) - jjk)
                        / (1.0 + abs(jjk)),
                        abs(poisson_bracket(rot(i, j), rot(j, k), s) + jik)
                        / (1.0 + abs(jik)),
                        abs(poisson_bracket(rot(i, k), rot(j, k), s) - jij)
                        / (1.0 + abs(jij)))
                    points += 3
    checks.append(_check_entry("so-n-closure", points, worst, tol))
    return _report("brackets", seed, n, checks)


def _suite_involution(n: int, seed: int, tol: float | None) -> dict:
    tol = 1e-5 if tol is None else tol
    (rng,) = _spawn(seed, 1)
    worst_h, points_h = 0.0, 0
    worst_c, points_c = 0.0, 0
    for mid in ("euclidean", "darboux3b", "taub-nut"):
        metric = catalog_lookup(mid)
        for pot in (None, kc_potential(metric, 0.7),
                    oscillator_potential(metric, 0.4)):
            for _ in range(6):
                mu2 = rng.uniform(0.0, 1.0)
                b = rng.uniform(-2.0, 2.0, n)
                sys_spec = SystemSpec(metric, pot, mu2, b=b)
                s = _random_state(rng, n)
                funcs = _integral_functions(sys_spec)
                values = [fn(s) for fn in funcs]
                grads = [fd_gradient(fn, s) for fn in funcs]
                nleft = n - 1  # funcs[1..nleft] left family, the rest right
                for a in range(len(funcs)):
                    for c in range(a + 1, len(funcs)):
                        if a >= 1 and (a <= nleft) != (c <= nleft):
                            # left and right families are each involutive on
                            # their own, but do not commute across families
                            continue
                        aq, ap = grads[a]
                        cq, cp = grads[c]
                        bracket = abs(np.dot(aq, cp) - np.dot(cq, ap))
                        rel = bracket / (1.0 + abs(values[a]) + abs(values[c]))
                        if a == 0:
                            worst_h = max(worst_h, rel)
                            points_h += 1
                        else:
                            worst_c = max(worst_c, rel)
                            points_c += 1
    checks = [_check_entry("hamiltonian-vs-integrals", points_h, worst_h, tol),
              _check_entry("integrals-in-involution", points_c, worst_c, tol)]
    return _report("involution", seed, n, checks)


def _suite_independence(n: int, seed: int, tol: float | None) -> dict:
    # tolerance here is the allowed fraction of rank-deficient sample states
    tol = 0.05 if tol is None else tol
    (rng,) = _spawn(seed, 1)
    metric = catalog_lookup("euclidean")
    sys_spec = SystemSpec(metric, kc_potential(metric, 1.0), 0.3,
                          b=rng.uniform(0.5, 2.5, n))
    funcs = _integral_functions(sys_spec)
    expected = 2 * n - 2
    trials, deficient = 20, 0
    for _ in range(trials):
        s = _random_state(rng, n)
        if independence_rank(funcs, s) < expected:
            deficient += 1
    fraction = deficient / trials
    entry = _check_entry("jacobian-rank", trials, fraction, tol)
    entry["expected_rank"] = expected
    entry["full_rank_states"] = trials - deficient
    return _report("independence", seed, n, [entry])


def _spherical_pack(s: SphericalPhaseState) -> np.ndarray:
    return np.concatenate([[s.r], s.theta, [s.p_r], s.p_theta])


def _spherical_unpack(vec: np.ndarray, n: int) -> SphericalPhaseState:
    return SphericalPhaseState(vec[0], vec[1:n], vec[n], vec[n + 1:])


def _spherical_bracket(f, g, s: SphericalPhaseState) -> float:
    """{F, G} over the chart's canonical pairs (r, p_r), (theta_j, p_theta_j)
    by Richardson-extrapolated central differences."""
    n = s.n
    x = _spherical_pack(s)

    def grad(fn):
        out = np.empty(2 * n)
        for i in range(2 * n):
            h = 1e-6 * max(1.0, abs(x[i]))
            d = np.zeros_like(x)
            d[i] = h
            coarse = (fn(_spherical_unpack(x + d, n))
                      - fn(_spherical_unpack(x - d, n))) / (2.0 * h)
            d[i] = 0.5 * h
            fine = (fn(_spherical_unpack(x + d, n))
                    - fn(_spherical_unpack(x - d, n))) / h
            out[i] = (4.0 * fine - coarse) / 3.0
        return out

    gf, gg = grad(f), grad(g)
    return float(np.dot(gf[:n], gg[n:]) - np.dot(gg[:n], gf[n:]))


def _suite_coords(n: int, seed: int, tol: float | None) -> dict:
    rngs = _spawn(seed, 5)
    checks = []

    def cart_q(i):
        return lambda st: float(to_cartesian(st).q[i])

    def cart_p(i):
        return lambda st: float(to_cartesian(st).p[i])

    worst, points = 0.0, 0
    for _ in range(6):
        s = _random_spherical(rngs[0], n)
        for i in range(n):
            for j in range(n):
                target = 1.0 if i == j else 0.0
                worst = max(worst, abs(
                    _spherical_bracket(cart_q(i), cart_p(j), s) - target))
                points += 1
            for j in range(i + 1, n):
                worst = max(worst,
                            abs(_spherical_bracket(cart_q(i), cart_q(j), s)),
                            abs(_spherical_bracket(cart_p(i), cart_p(j), s)))
                points += 2
    checks.append(_check_entry("canonicity", points,
                               worst, 1e-6 if tol is None else tol))

    worst, points = 0.0, 0
    for _ in range(20):
        s = _random_spherical(rngs[1], n)
        cart = to_cartesian(s)
        back = from_cartesian(cart)
        worst = max(worst, abs(back.r - s.r), abs(back.p_r - s.p_r),
                    float(np.abs(back.theta - s.theta).max()),
                    float(np.abs(back.p_theta - s.p_theta).max()))
        c0 = _random_state(rngs[1], n)
        c1 = to_cartesian(from_cartesian(c0))
        worst = max(worst, float(np.abs(c1.q - c0.q).max()),
                    float(np.abs(c1.p - c0.p).max()))
        points += 2
    checks.append(_check_entry("round-trip", points,
                               worst, 1e-12 if tol is None else tol))

    worst, points = 0.0, 0
    for _ in range(20):
        s = _random_spherical(rngs[2], n)
        b = rngs[2].uniform(0.3, 1.5, n)
        right = integral_set(to_cartesian(s), b).right
        for m in range(2, n + 1):
            sph = spherical_casimir(m, s, b)
            worst = max(worst, abs(sph - right[m - 2]) / (1.0 + abs(right[m - 2])))
            points += 1
    checks.append(_check_entry("casimir-match", points,
                               worst, 1e-10 if tol is None else tol))

    worst, points = 0.0, 0
    for _ in range(20):
        s = _random_spherical(rngs[3], n)
        b = rngs[3].uniform(0.3, 1.5, n)
        chain = angular_chain(s, b)
        for m in range(2, n + 1):
            sph = spherical_casimir(m, s, b)
            worst = max(worst, abs(chain[m - 2] - sph) / (1.0 + abs(sph)))
            points += 1
    checks.append(_check_entry("chain-consistency", points,
                               worst, 1e-12 if tol is None else tol))

    metric = catalog_lookup("darboux3b")
    potential = kc_potential(metric, 0.7)
    worst, points = 0.0, 0
    for _ in range(20):
        s = _random_spherical(rngs[4], n)
        b = rngs[4].uniform(0.0, 1.0, n)
        c_n = spherical_casimir(n, s, b)
        reduced = radial_hamiltonian(s.r, s.p_r, c_n, 0.3, metric, potential)
        full = hamiltonian(SystemSpec(metric, potential, 0.3, b=b),
                           to_cartesian(s))
        worst = max(worst, abs(reduced - full) / (1.0 + abs(full)))
        points += 1
    checks.append(_check_entry("radial-reduction", points,
                               worst, 1e-12 if tol is None else tol))
    return _report("coords", seed, n, checks)


def _suite_identities(n: int, seed: int, tol: float | None) -> dict:
    tol = 1e-10 if tol is None else tol
    (rng,) = _spawn(seed, 1)
    worst, points = 0.0, 0
    for _ in range(20):
        # |q| = 1 is excluded by construction (one identity divides by ln r)
        if rng.random() < 0.5:
            r = rng.uniform(0.3, 0.9)
        else:
            r = rng.uniform(1.1, 3.0)
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        point = PhaseState(r * direction, rng.uniform(-2.0, 2.0, n))
        out = decomposition_identities(point, {
            "nu": float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0])),
            "a": rng.uniform(0.5, 2.0), "b": rng.uniform(0.5, 2.0),
            "c": rng.uniform(-1.0, 1.0), "d": rng.uniform(-1.0, 1.0),
            "m": rng.uniform(0.5, 2.0), "mu2": rng.uniform(0.0, 2.0),
            "beta": rng.uniform(-1.0, 1.0), "gamma": rng.uniform(-1.0, 1.0)})
        worst = max(worst, max(out.values()))
        points += len(out)
    return _report("identities", seed, n,
                   [_check_entry("decomposition-identities", points, worst,
                                 tol)])


def _suite_green(n: int, seed: int, tol: float | None) -> dict:
    tol_h = 1e-7 if tol is None else tol
    tol_a = 1e-8 if tol is None else tol
    worst_h, points_h = 0.0, 0
    worst_a, points_a = 0.0, 0
    for mid in CATALOG:
        metric = catalog_lookup(mid)
        potential = kc_potential(metric, 1.0)
        lo, hi = metric.domain

        def flux(r):
            return r * r * metric.f(r) * potential.du(r)

        # the radial laplacian prefactor 1/(r^2 f^3) grows without bound at
        # domain extremes, so the absolute bound is checked on [0.1, 10]
        window = (max(lo, 0.1), min(hi, 10.0))
        for r in sample_radii(window, 32):
            r = float(r)
            # r^2 f U' is constant for a harmonic U, so a wide step costs no
            # truncation and keeps the finite-difference rounding noise small
            h = 1e-4 * max(1.0, r)
            coarse = (flux(r + h) - flux(r - h)) / (2.0 * h)
            fine = (flux(r + 0.5 * h) - flux(r - 0.5 * h)) / h
            lap = ((4.0 * fine - coarse) / 3.0) / (r * r * metric.f(r) ** 3)
            worst_h = max(worst_h, abs(lap))
            points_h += 1

        fit_window = (max(lo, 0.2), min(hi, 5.0))
        radii = [float(r) for r in sample_radii(fit_window, 16)]
        closed = np.array([green_function(metric, r) for r in radii])
        quad = np.array([green_function(metric, r, method="quadrature")
                         for r in radii])
        design = np.column_stack([closed, np.ones_like(closed)])
        coef, *_ = np.linalg.lstsq(design, quad, rcond=None)
        worst_a = max(worst_a, float(np.abs(design @ coef - quad).max()))
        points_a += len(radii)
    checks = [_check_entry("harmonicity", points_h, worst_h, tol_h),
              _check_entry("quadrature-affine-match", points_a, worst_a,
                           tol_a)]
    return _report("green", seed, n, checks)


_SUITE_RUNNERS = {
    "brackets": _suite_brackets,
    "involution": _suite_involution,
    "independence": _suite_independence,
    "coords": _suite_coords,
    "identities": _suite_identities,
    "green": _suite_green,
}


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _format_bound(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:g}"


def _cmd_catalog(args) -> int:
    if args.action == "list":
        for mid in CATALOG:
            print(mid)
        return 0
    mid = args.id
    if mid not in CATALOG:
        print(f"error: unknown space id {mid!r} (known: "
              + ", ".join(CATALOG) + ")", file=sys.stderr)
        return 2
    entry = CATALOG[mid]
    metric = catalog_lookup(mid)
    lo, hi = metric.domain
    form = catalog_green_form(mid)
    print(f"space: {mid}")
    print(f"  {entry.description}")
    print(f"  f(r) = {entry.f_source}")
    line = f"  domain: ({_format_bound(lo)}, {_format_bound(hi)})"
    if entry.domain_note:
        line += f"  [{entry.domain_note}]"
    print(line)
    if entry.defaults:
        pairs = ", ".join(f"{k} = {v}" for k, v in entry.defaults.items())
        print(f"  parameters (defaults): {pairs}")
    print(f"  green function: U(r) = {form}")
    print(f"  kc potential: alpha * ({form})")
    print(f"  oscillator potential: beta / ({form})^2")
    print("  monopole term: mu2 / (2 f(r)^2 r^2)")
    print("  centrifugal terms: b_i / (2 f(r)^2 q_i^2)")
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    outdir = args.out if args.out is not None else (cfg.outdir or ".")
    os.makedirs(outdir, exist_ok=True)
    record = integrate(cfg.system, cfg.initial, cfg.t_end, method=cfg.method,
                       rtol=cfg.rtol, atol=cfg.atol, samples=cfg.samples,
                       step=cfg.step)
    csv_path = os.path.join(outdir, "trajectory.csv")
    _write_trajectory_csv(csv_path, record, cfg.system.n)
    summary = {
        "system": cfg.system.label,
        "dimension": cfg.system.n,
        "mu2": cfg.system.mu2,
        "b": list(cfg.system.b),
        "t_end_requested": cfg.t_end,
        "trajectory": os.path.basename(csv_path),
        "conservation": conservation_report(record),
    }
    json_path = os.path.join(outdir, "summary.json")
    with open(json_path, "w", encoding="utf-8") as handle:
        handle.write(_dump_json(summary))
    if record.halted is not None:
        print(f"integration halted: {record.halted}", file=sys.stderr)
        print(f"partial output written to {csv_path} and {json_path}",
              file=sys.stderr)
        return 3
    print(f"wrote {csv_path} and {json_path} ({len(record.times)} samples, "
          f"t_final = {record.times[-1]:g})")
    return 0


def _cmd_verify(args) -> int:
    dimension, seed = 3, 42
    if args.config is not None:
        cfg = load_config(args.config)
        dimension, seed = cfg.system.n, cfg.seed
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError(
                f"seed must fit in an unsigned 64-bit integer, got {args.seed}")
        seed = args.seed
    if args.tol is not None and not args.tol > 0.0:
        raise ConfigError(f"tol must be positive, got {args.tol}")
    report = _SUITE_RUNNERS[args.suite](dimension, seed, args.tol)
    text = _dump_json(report)
    sys.stdout.write(text)
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"verify-{args.suite}.json")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    return 0 if report["pass"] else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmsflow",
        description="Superintegrable radial systems on curved spaces: "
                    "catalog, simulation, verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="inspect the built-in space catalog")
    cat_sub = cat.add_subparsers(dest="action", required=True)
    cat_sub.add_parser("list", help="print all space ids")
    show = cat_sub.add_parser("show", help="print formulas for one space")
    show.add_argument("id", help="catalog space id")
    cat.set_defaults(func=_cmd_catalog)

    sim = sub.add_parser("simulate", help="integrate a configured system")
    sim.add_argument("--config", required=True, help="YAML configuration file")
    sim.add_argument("--out", default=None,
                     help="output directory (default: config output.directory "
                          "or the current directory)")
    sim.set_defaults(func=_cmd_simulate)

    ver = sub.add_parser("verify", help="run a self-verification suite")
    ver.add_argument("suite", choices=VERIFY_SUITES)
    ver.add_argument("--config", default=None,
                     help="optional YAML config (sets dimension and seed)")
    ver.add_argument("--seed", type=int, default=None,
                     help="override the random seed")
    ver.add_argument("--tol", type=float, default=None,
                     help="override every check tolerance in the suite")
    ver.add_argument("--out", default=None,
                     help="also write the JSON report into this directory")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MetricError, PotentialError, ChartError, ExprError,
            SingularStateError, DomainViolation) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
