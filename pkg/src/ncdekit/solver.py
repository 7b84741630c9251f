"""Matrix-algebra integration on closed groups: Picard fixed point, Magnus
expansion with the Bernoulli recursion, drift diagnostics, tangent-vector
extraction, and adaptive restarts with local-solution gluing.

The ambient Banach algebra is instantiated as n x n complex matrices with
the spectral norm.  Both solvers share the composite 4-point Gauss-Legendre
machinery from `quadrature`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

import numpy as np

from .jsonutil import format_float
from .quadrature import running_integral, step_nodes


class PicardConvergenceError(RuntimeError):
    """Fixed-point iteration did not settle; the interval is too long for a
    single sweep and the caller should subdivide (see solve_with_restarts)."""


class OverlapMismatchError(RuntimeError):
    """Adjacent local solutions disagree on their shared grid points."""


def opnorm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


# -- matrix exponential / logarithm ------------------------------------------

def expm_taylor(a: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring on the truncated exponential series.

    The argument is halved until its norm is <= 0.5, summed to machine
    precision, then squared back.
    """
    a = np.asarray(a, dtype=complex)
    norm = opnorm(a)
    squarings = 0 if norm <= 0.5 else int(math.ceil(math.log2(norm / 0.5)))
    b = a / (2 ** squarings)
    eye = np.eye(a.shape[0], dtype=complex)
    term = eye.copy()
    acc = eye.copy()
    for k in range(1, 60):
        term = term @ b / k
        acc = acc + term
        if opnorm(term) <= 1e-18 * max(1.0, opnorm(acc)):
            break
    for _ in range(squarings):
        acc = acc @ acc
    return acc


def logm_series(g: np.ndarray, max_terms: int = 4000) -> np.ndarray:
    """Principal log via the convergent series; requires ||g - e|| < 1."""
    g = np.asarray(g, dtype=complex)
    eye = np.eye(g.shape[0], dtype=complex)
    e = g - eye
    if opnorm(e) >= 1.0:
        raise ValueError("||g - e|| >= 1: series logarithm undefined")
    power = e.copy()
    acc = e.copy()
    for k in range(2, max_terms + 1):
        power = power @ e
        acc = acc + ((-1) ** (k + 1)) * power / k
        if opnorm(power) / k <= 1e-18 * max(1.0, opnorm(acc)):
            break
    return acc


# -- Bernoulli numbers ---------------------------------------------------------

_BERNOULLI_CACHE: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Exact B_n, first-kind convention (B_1 = -1/2), via the recurrence
    sum_{k<=n} C(n+1, k) B_k = 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    while len(_BERNOULLI_CACHE) <= n:
        m = len(_BERNOULLI_CACHE)
        total = sum(comb(m + 1, k) * _BERNOULLI_CACHE[k] for k in range(m))
        _BERNOULLI_CACHE.append(-total / Fraction(m + 1))
    return _BERNOULLI_CACHE[n]


# -- problem / path containers -------------------------------------------------

@dataclass
class MatFun:
    """A continuous matrix-valued path t -> M(t) on a real interval."""

    dim: int
    f: Callable[[float], np.ndarray]
    domain: tuple[float, float] = (-math.inf, math.inf)

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.f(t), dtype=complex)

    def check_interval(self, t0: float, t1: float):
        lo, hi = self.domain
        if t0 < lo - 1e-12 or t1 > hi + 1e-12:
            raise ValueError(f"[{t0}, {t1}] is outside the domain {self.domain}")


def as_matfun(m, dim: int) -> MatFun:
    return m if isinstance(m, MatFun) else MatFun(dim, m)


def _skew3(w) -> np.ndarray:
    w1, w2, w3 = w
    return np.array([[0, -w3, w2], [w3, 0, -w1], [-w2, w1, 0]], dtype=complex)


def so3_rotor(domain=(-100.0, 100.0)) -> MatFun:
    """Builtin so(3)-valued path: the rotor M(t) = skew(cos t, sin t, 1)."""
    return MatFun(3, lambda t: _skew3((math.cos(t), math.sin(t), 1.0)), domain)


def const_plus_sin(a: np.ndarray, b: np.ndarray, domain=(-100.0, 100.0)) -> MatFun:
    """Builtin M(t) = A + sin(t) B."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return MatFun(a.shape[0], lambda t: a + math.sin(t) * b, domain)


def constant_matfun(a: np.ndarray, domain=(-math.inf, math.inf)) -> MatFun:
    a = np.asarray(a, dtype=complex)
    return MatFun(a.shape[0], lambda t: a, domain)


@dataclass
class MatPath:
    """Matrix values sampled on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def value_at(self, t: float, tol: float = 1e-9) -> np.ndarray:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > tol:
            raise KeyError(f"t={t} is not a grid time of this path")
        return self.values[idx]


# -- group specifications --------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """A closed matrix group given by defect functionals: group_defect
    vanishes exactly on G, algebra_defect exactly on L(G)."""

    name: str
    group_defect: Callable[[np.ndarray], float]
    algebra_defect: Callable[[np.ndarray], float]


def orthogonal_group() -> GroupSpec:
    return GroupSpec(
        "orthogonal",
        lambda g: opnorm(g.T @ g - np.eye(g.shape[0])),
        lambda u: opnorm(u + u.T),
    )


def special_linear_group() -> GroupSpec:
    return GroupSpec(
        "special_linear",
        lambda g: abs(np.linalg.det(g) - 1.0),
        lambda u: abs(np.trace(u)),
    )


def unipotent_group() -> GroupSpec:
    # Unipotent upper-triangular: everything on or below the diagonal
    # must match the identity; tangent vectors are strictly upper.
    return GroupSpec(
        "unipotent",
        lambda g: opnorm(np.tril(g) - np.eye(g.shape[0])),
        lambda u: opnorm(np.tril(u)),
    )


BUILTIN_GROUPS = {
    "orthogonal": orthogonal_group,
    "special_linear": special_linear_group,
    "unipotent": unipotent_group,
}


def group_drift(path: MatPath, spec: GroupSpec) -> float:
    """Max group defect over the path's grid."""
    return max(spec.group_defect(v) for v in path.values)


# -- Picard fixed point ------------------------------------------------------------

def picard_solve(m, t0: float, g0: np.ndarray, t1: float, *,
                 step: float = 1 / 64, iters: int = 60,
                 tol: float = 1e-12) -> MatPath:
    """Global fixed-point iteration of T -> g0 + int_{t0}^t M T.

    The iterate is represented by its values at the Gauss nodes of a
    uniform partition; the running integral uses the cubic interpolant
    per step, so the fixed point is the 4-node collocation solution.
    Raises PicardConvergenceError when `iters` sweeps do not settle.
    """
    g0 = np.asarray(g0, dtype=complex)
    n = g0.shape[0]
    m = as_matfun(m, n)
    m.check_interval(t0, t1)
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    if abs(np.linalg.det(g0)) == 0.0:
        raise ValueError("g0 must be invertible")

    n_steps = max(1, round((t1 - t0) / step))
    ends, nodes, h = step_nodes(t0, t1, n_steps)
    m_nodes = np.array([[m(t) for t in row] for row in nodes])

    t_nodes = np.broadcast_to(g0, (n_steps, 4, n, n)).copy()
    scale = max(1.0, opnorm(g0))
    delta = math.inf
    used = 0
    for used in range(1, iters + 1):
        integrand = m_nodes @ t_nodes
        _, at_nodes = running_integral(integrand, h)
        new_nodes = g0 + at_nodes
        delta = max(opnorm(d) for d in (new_nodes - t_nodes).reshape(-1, n, n))
        t_nodes = new_nodes
        if delta < tol * scale:
            break
    if delta >= tol * scale:
        raise PicardConvergenceError(
            f"no convergence after {iters} sweeps (last delta {delta:.3e}); "
            "the interval is too long, subdivide it")

    integrand = m_nodes @ t_nodes
    at_ends, at_nodes = running_integral(integrand, h)
    residual = max(opnorm(d) for d in (g0 + at_nodes - t_nodes).reshape(-1, n, n))
    values = g0 + at_ends
    values[0] = g0
    return MatPath(ends, values, {
        "solver": "picard", "step": h, "iterations": used,
        "tol": tol, "residual": residual,
    })


# -- Magnus expansion ----------------------------------------------------------------

def _compositions(total: int, parts: int):
    """All tuples of `parts` integers >= 1 summing to total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def magnus_step_terms(m, a: float, h: float, order: int,
                      dim: int | None = None) -> list[np.ndarray]:
    """The terms Omega_1..Omega_order of the Magnus series on [a, a+h].

    Omega_1 integrates M; Omega_n integrates the Bernoulli-weighted sums
    of nested ad-chains of lower terms applied to M, all on the step's
    Gauss nodes.  Returns the values at the right endpoint.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if dim is None:
        dim = np.asarray(m(a)).shape[0]
    m = as_matfun(m, dim)
    _, nodes, _ = step_nodes(a, a + h, 1)
    m_nodes = np.array([m(t) for t in nodes[0]])          # (4, n, n)

    omega_nodes: list[np.ndarray] = []
    omega_ends: list[np.ndarray] = []
    for n_term in range(1, order + 1):
        if n_term == 1:
            integrand = m_nodes
        else:
            integrand = np.zeros_like(m_nodes)
            for j in range(1, n_term):
                bj = bernoulli(j)
                if bj == 0:
                    continue
                weight = float(bj) / math.factorial(j)
                for comp in _compositions(n_term - 1, j):
                    for node in range(4):
                        x = m_nodes[node]
                        for k in reversed(comp):
                            x = commutator(omega_nodes[k - 1][node], x)
                        integrand[node] = integrand[node] + weight * x
        at_ends, at_nodes = running_integral(integrand[None, ...], h)
        omega_nodes.append(at_nodes[0])
        omega_ends.append(at_ends[1])
    return omega_ends


def magnus_solve(m, t0: float, g0: np.ndarray, t1: float, *,
                 step: float = 1 / 64, order: int = 4) -> MatPath:
    """Advance by e^Omega per step, Omega summed to the requested order.

    A step is rejected and halved whenever the cheap estimate
    ||Omega_1|| + ||Omega_2|| reaches pi (the convergence guard for the
    exponential coordinates).
    """
    g0 = np.asarray(g0, dtype=complex)
    m = as_matfun(m, g0.shape[0])
    m.check_interval(t0, t1)
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    if order < 1:
        raise ValueError("order must be >= 1")

    times = [t0]
    values = [g0]
    t = t0
    g = g0
    rejections = 0
    while t < t1 - 1e-14 * max(1.0, abs(t1)):
        h = min(step, t1 - t)
        while True:
            guard_terms = magnus_step_terms(m, t, h, min(max(order, 2), order + 1))
            estimate = sum(opnorm(w) for w in guard_terms[:2])
            if estimate < math.pi:
                break
            h /= 2
            rejections += 1
            if h < 1e-9 * step:
                raise RuntimeError("step underflow under the pi guard")
        omega = sum(magnus_step_terms(m, t, h, order))
        g = expm_taylor(omega) @ g
        t = t + h
        times.append(t)
        values.append(g)
    return MatPath(np.array(times), np.array(values), {
        "solver": "magnus", "step": step, "order": order,
        "rejections": rejections,
    })


# -- proposition-level checks -----------------------------------------------------

def one_param_group_check(u: np.ndarray, spec: GroupSpec,
                          t_grid: Sequence[float], tol: float = 1e-8) -> float:
    """Max group defect of t -> e^{t u} over the grid, folded with the
    worst semigroup mismatch e^{(s+t)u} vs e^{su} e^{tu} on adjacent grid
    pairs.  Refuses to run when u itself is not in L(G) to tolerance."""
    u = np.asarray(u, dtype=complex)
    adef = spec.algebra_defect(u)
    if adef >= tol:
        raise ValueError(
            f"matrix is not in L({spec.name}) to tolerance (defect {adef:.3e})")
    t_grid = list(t_grid)
    exps = {t: expm_taylor(t * u) for t in t_grid}
    defect = max(spec.group_defect(g) for g in exps.values())
    for s, t in zip(t_grid, t_grid[1:]):
        mismatch = opnorm(expm_taylor((s + t) * u) - exps[s] @ exps[t])
        defect = max(defect, mismatch)
    return defect


def tangent_extract(gamma: Callable[[float], np.ndarray], h: float,
                    identity_tol: float = 1e-6) -> np.ndarray:
    """Central difference (gamma(h) - gamma(-h)) / 2h at the identity."""
    g0 = np.asarray(gamma(0.0), dtype=complex)
    dev = opnorm(g0 - np.eye(g0.shape[0]))
    if dev > identity_tol:
        raise ValueError(f"gamma(0) is far from the identity (||.|| = {dev:.3e})")
    gp = np.asarray(gamma(h), dtype=complex)
    gm = np.asarray(gamma(-h), dtype=complex)
    return (gp - gm) / (2.0 * h)


@dataclass(frozen=True)
class LogMembershipResult:
    in_group_predicted: bool
    algebra_defect: float
    group_defect: float


def log_in_LG_membership(g: np.ndarray, spec: GroupSpec,
                         threshold: float = 1e-8) -> LogMembershipResult:
    """Series log of g (needs ||g - e|| < 1), with its algebra defect and
    g's own group defect; predicts membership from log(g) in L(G)."""
    g = np.asarray(g, dtype=complex)
    u = logm_series(g)
    adef = spec.algebra_defect(u)
    return LogMembershipResult(adef < threshold, adef, spec.group_defect(g))


# -- restarts / gluing --------------------------------------------------------------

def _solve_piece(m: MatFun, a: float, g_a: np.ndarray, b: float, *,
                 step: float, iters: int, tol: float) -> MatPath:
    # Interaction-picture shift: with E(s) = e^{s M(a)} and
    # m1(s) = E(-s) (M(a+s) - M(a)) E(s), solve R' = m1 R from the
    # identity and reassemble T(a+s) = E(s) R(s) g_a.  m1 vanishes at
    # s = 0 and stays small on short pieces, which is what makes the
    # piecewise strategy converge where a single sweep would not.
    a0 = m(a)

    def shifted(s: float) -> np.ndarray:
        e_plus = expm_taylor(s * a0)
        e_minus = expm_taylor(-s * a0)
        return e_minus @ (m(a + s) - a0) @ e_plus

    inner = picard_solve(MatFun(m.dim, shifted), 0.0, np.eye(m.dim, dtype=complex),
                         b - a, step=step, iters=iters, tol=tol)
    times = a + inner.times
    values = np.array([expm_taylor(s * a0) @ r @ g_a
                       for s, r in zip(inner.times, inner.values)])
    meta = dict(inner.meta, solver="picard_shifted", base_time=a)
    return MatPath(times, values, meta)


def paste_pieces(pieces: Sequence[MatPath], overlap_tol: float = 1e-8) -> MatPath:
    """Glue overlapping local solutions into one path.

    Adjacent pieces must agree on every shared grid time to overlap_tol,
    otherwise OverlapMismatchError is raised.
    """
    if not pieces:
        raise ValueError("no pieces to paste")
    times = list(pieces[0].times)
    values = list(pieces[0].values)
    meta = {"solver": "picard_restarts", "pieces": len(pieces),
            "max_overlap_mismatch": 0.0}
    for piece in pieces[1:]:
        t_start = piece.times[0]
        checked = False
        for t, v in zip(times, values):
            if t >= t_start - 1e-12:
                try:
                    other = piece.value_at(t)
                except KeyError:
                    continue
                mismatch = opnorm(v - other)
                meta["max_overlap_mismatch"] = max(meta["max_overlap_mismatch"], mismatch)
                checked = True
                if mismatch > overlap_tol:
                    raise OverlapMismatchError(
                        f"pieces disagree at t={t}: ||diff|| = {mismatch:.3e}")
        if not checked:
            raise OverlapMismatchError("adjacent pieces share no grid point")
        keep = [(t, v) for t, v in zip(times, values) if t < t_start - 1e-12]
        times = [t for t, _ in keep] + list(piece.times)
        values = [v for _, v in keep] + list(piece.values)
    return MatPath(np.array(times), np.array(values), meta)


def solve_with_restarts(m, t0: float, g0: np.ndarray, t1: float, *,
                        step: float = 1 / 64, iters: int = 60, tol: float = 1e-12,
                        piece_length: float | None = None,
                        overlap_tol: float = 1e-8) -> MatPath:
    """Adaptive piecewise solve: each piece runs the shifted local system
    and pieces overlap by one step so the gluing can be cross-checked.

    A piece that fails to converge is halved; the assembled path is the
    pasted union of the local solutions.
    """
    g0 = np.asarray(g0, dtype=complex)
    m = as_matfun(m, g0.shape[0])
    m.check_interval(t0, t1)
    piece_len = piece_length if piece_length is not None else (t1 - t0)
    min_len = (t1 - t0) * 1e-4

    pieces: list[MatPath] = []
    t = t0
    g = g0
    while t < t1 - 1e-12 * max(1.0, abs(t1)):
        length = min(piece_len, t1 - t)
        n_steps = max(1, round(length / step))
        h = length / n_steps
        extension = h if t + length < t1 - 1e-12 else 0.0
        try:
            piece = _solve_piece(m, t, g, t + length + extension,
                                 step=h, iters=iters, tol=tol)
        except PicardConvergenceError:
            piece_len = length / 2
            if piece_len < min_len:
                raise
            continue
        pieces.append(piece)
        g = piece.value_at(t + length)
        t = t + length
    return paste_pieces(pieces, overlap_tol)


# -- CSV ------------------------------------------------------------------------------

def matpath_csv_lines(path: MatPath, spec: GroupSpec | None = None) -> list[str]:
    """CSV rows: t, row-major re/im entries, and the group defect."""
    n = path.values.shape[1]
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}{j}", f"im_{i}{j}"]
    header.append("defect")
    lines = [",".join(header)]
    for t, v in zip(path.times, path.values):
        row = [format_float(float(t))]
        for i in range(n):
            for j in range(n):
                row += [format_float(v[i, j].real), format_float(v[i, j].imag)]
        row.append(format_float(spec.group_defect(v) if spec else 0.0))
        lines.append(",".join(row))
    return lines
