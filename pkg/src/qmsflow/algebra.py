"""sl(2,R) symplectic realization, universal integrals, and a numerical
Poisson-bracket engine.

The three phase-space functions

    J- = q^2 ,   J3 = q.p ,   J+ = p^2 + sum_i b_i/q_i^2

close the sl(2,R) Poisson brackets {J3,J+} = 2J+, {J3,J-} = -2J-,
{J-,J+} = 4J3 for any choice of the centrifugal coefficients b.  Out of them
come the left/right families of quadratic integrals

    C^(m) = sum_{1<=i<j<=m} [ (q_i p_j - q_j p_i)^2 + b_i q_j^2/q_i^2
                              + b_j q_i^2/q_j^2 ] + sum_{i<=m} b_i ,

with C_(m) the mirror image over the last m axes and C^(N) = C_(N).  These
are conserved by every Hamiltonian of the form
[p^2 + mu^2/q^2 + sum b_i/q_i^2]/(2 f(|q|)^2) + U(|q|), whatever f and U.

Brackets of arbitrary user-supplied functions are computed numerically:
central differences with one level of Richardson extrapolation, per-coordinate
step h_i = 1e-6 * max(1, |x_i|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PhaseState", "Sl2Triple", "IntegralSet", "SingularStateError",
    "sl2_realize", "casimir_left", "casimir_right", "integral_set",
    "so_n_generator", "angular_momentum_sq",
    "fd_gradient", "poisson_bracket", "independence_rank",
]


class SingularStateError(ValueError):
    """A coordinate hit a centrifugal singularity (q_i = 0 with b_i != 0)."""


@dataclass(frozen=True)
class PhaseState:
    """Generic coordinates q and conjugate momenta p (N-vectors, |q| > 0)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.ndim != 1 or q.shape != p.shape:
            raise ValueError(f"q and p must be equal-length vectors, got {q.shape} and {p.shape}")
        if q.shape[0] < 1:
            raise ValueError("empty state")
        if not np.dot(q, q) > 0.0:
            raise ValueError("|q| must be positive")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.q))


@dataclass(frozen=True)
class Sl2Triple:
    """Values (J-, J3, J+) of the coalgebra generators at a phase point."""

    jminus: float
    j3: float
    jplus: float

    def __post_init__(self):
        if not self.jminus > 0.0:
            raise ValueError(f"J- = q^2 must be positive, got {self.jminus}")


def _check_b(s: PhaseState, b) -> np.ndarray:
    b = np.zeros(s.n) if b is None else np.asarray(b, dtype=float)
    if b.shape != (s.n,):
        raise ValueError(f"b must have length {s.n}, got shape {b.shape}")
    hit = (b != 0.0) & (s.q == 0.0)
    if np.any(hit):
        i = int(np.argmax(hit))
        raise SingularStateError(f"q_{i} = 0 with b_{i} = {b[i]} != 0")
    return b


def sl2_realize(s: PhaseState, b: Sequence[float] | None = None) -> Sl2Triple:
    """Evaluate (J-, J3, J+) at a phase point for centrifugal coefficients b."""
    b = _check_b(s, b)
    q, p = s.q, s.p
    jminus = float(np.dot(q, q))
    j3 = float(np.dot(q, p))
    jplus = float(np.dot(p, p))
    nz = b != 0.0
    if np.any(nz):
        jplus += float(np.sum(b[nz] / q[nz] ** 2))
    return Sl2Triple(jminus, j3, jplus)


def so_n_generator(i: int, j: int, s: PhaseState) -> float:
    """Angular momentum component J_ij = q_i p_j - q_j p_i (0-based, i < j)."""
    if not 0 <= i < j < s.n:
        raise ValueError(f"need 0 <= i < j < {s.n}, got ({i}, {j})")
    return float(s.q[i] * s.p[j] - s.q[j] * s.p[i])


def angular_momentum_sq(s: PhaseState) -> float:
    """L^2 = sum_{i<j} J_ij^2, the b = 0 value of C^(N) = C_(N)."""
    return _casimir_over(range(s.n), s.q, s.p, np.zeros(s.n))


def _casimir_over(indices, q, p, b) -> float:
    idx = list(indices)
    total = float(np.sum(b[idx]))
    for a, i in enumerate(idx):
        for j in idx[a + 1:]:
            jij = q[i] * p[j] - q[j] * p[i]
            total += jij * jij
            if b[i] != 0.0:
                total += b[i] * q[j] ** 2 / q[i] ** 2
            if b[j] != 0.0:
                total += b[j] * q[i] ** 2 / q[j] ** 2
    return total


def casimir_left(m: int, s: PhaseState, b: Sequence[float] | None = None) -> float:
    """C^(m): the integral built over the first m axes, 2 <= m <= N."""
    if not 2 <= m <= s.n:
        raise ValueError(f"need 2 <= m <= {s.n}, got m = {m}")
    b = _check_b(s, b)
    return _casimir_over(range(m), s.q, s.p, b)


def casimir_right(m: int, s: PhaseState, b: Sequence[float] | None = None) -> float:
    """C_(m): the mirror integral over the last m axes, 2 <= m <= N."""
    if not 2 <= m <= s.n:
        raise ValueError(f"need 2 <= m <= {s.n}, got m = {m}")
    b = _check_b(s, b)
    return _casimir_over(range(s.n - m, s.n), s.q, s.p, b)


@dataclass(frozen=True)
class IntegralSet:
    """All universal integrals at one state: left C^(2..N), right C_(2..N).

    The top members coincide by construction (same index set), which
    `coincide` records; C_(N) is therefore redundant but kept for symmetry.
    """

    left: tuple          # (C^(2), ..., C^(N))
    right: tuple         # (C_(2), ..., C_(N))
    coincide: bool

    def as_dict(self) -> dict:
        n = len(self.left) + 1
        out = {f"Cl{m}": v for m, v in zip(range(2, n + 1), self.left)}
        out.update({f"Cr{m}": v for m, v in zip(range(2, n + 1), self.right)})
        return out


def integral_set(s: PhaseState, b: Sequence[float] | None = None) -> IntegralSet:
    b = _check_b(s, b)
    left = tuple(_casimir_over(range(m), s.q, s.p, b) for m in range(2, s.n + 1))
    right = tuple(_casimir_over(range(s.n - m, s.n), s.q, s.p, b) for m in range(2, s.n + 1))
    return IntegralSet(left, right, coincide=(left[-1] == right[-1]))


# ---------------------------------------------------------------------------
# numerical brackets
# ---------------------------------------------------------------------------

_EPS = 1e-6


def fd_gradient(fn: Callable[[PhaseState], float], s: PhaseState,
                eps: float = _EPS) -> tuple[np.ndarray, np.ndarray]:
    """(dF/dq, dF/dp) by central differences with one Richardson level.

    Per-coordinate step h_i = eps * max(1, |x_i|); the extrapolation
    (4 D(h/2) - D(h))/3 cancels the leading h^2 truncation term.  Evaluation
    failures at stencil points (domain exits, centrifugal singularities)
    propagate to the caller.
    """
    x = np.concatenate([s.q, s.p])
    n = s.n
    grad = np.empty(2 * n)

    def feval(vec):
        return float(fn(PhaseState(vec[:n], vec[n:])))

    for i in range(2 * n):
        h = eps * max(1.0, abs(x[i]))
        d = np.zeros_like(x)
        d[i] = h
        coarse = (feval(x + d) - feval(x - d)) / (2 * h)
        d[i] = 0.5 * h
        fine = (feval(x + d) - feval(x - d)) / h
        grad[i] = (4.0 * fine - coarse) / 3.0
    return grad[:n], grad[n:]


def poisson_bracket(f: Callable[[PhaseState], float],
                    g: Callable[[PhaseState], float],
                    s: PhaseState, eps: float = _EPS) -> float:
    """{F, G} = sum_i (dF/dq_i dG/dp_i - dG/dq_i dF/dp_i), numerically."""
    fq, fp = fd_gradient(f, s, eps)
    gq, gp = fd_gradient(g, s, eps)
    return float(np.dot(fq, gp) - np.dot(gq, fp))


def independence_rank(functions: Sequence[Callable[[PhaseState], float]],
                      s: PhaseState, threshold: float = 1e-8) -> int:
    """Numerical rank of the Jacobian of the given functions at s.

    Rank counts singular values above threshold * (largest singular value);
    gradients use the same finite-difference scheme as poisson_bracket.  The
    threshold sits an order of magnitude above the ~1e-7 noise floor of the
    gradients.
    """
    rows = []
    for fn in functions:
        gq, gp = fd_gradient(fn, s)
        rows.append(np.concatenate([gq, gp]))
    jac = np.array(rows)
    sv = np.linalg.svd(jac, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > threshold * sv[0]))
