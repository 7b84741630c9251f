"""Composite 4-point Gauss-Legendre quadrature with running integrals.

Used by the Picard / Magnus solvers and the coefficient transport: every
integrand is sampled at the four Gauss nodes of each step, and running
integrals at the interior nodes are obtained by integrating the cubic
interpolant through those samples (exact for the polynomial degree the
nodes support).
"""
from __future__ import annotations

import numpy as np

_x, _w = np.polynomial.legendre.leggauss(4)
GAUSS_NODES = (_x + 1.0) / 2.0          # nodes on [0, 1]
GAUSS_WEIGHTS = _w / 2.0                # weights on [0, 1]


def _partial_matrix() -> np.ndarray:
    # P[k, j] = integral from 0 to node_k of the j-th Lagrange basis poly.
    n = len(GAUSS_NODES)
    vander = np.vander(GAUSS_NODES, n, increasing=True)      # V[i, m] = c_i^m
    coeffs = np.linalg.inv(vander)                           # basis j -> monomial coeffs
    powers = np.arange(1, n + 1)
    upper = GAUSS_NODES[:, None] ** powers[None, :] / powers[None, :]
    return upper @ coeffs


PARTIAL_MATRIX = _partial_matrix()


def step_nodes(t0: float, t1: float, n_steps: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Uniform partition of [t0, t1]: (step endpoints, per-step node times, h)."""
    if n_steps < 1:
        raise ValueError("need at least one step")
    ends = np.linspace(t0, t1, n_steps + 1)
    h = (t1 - t0) / n_steps
    nodes = ends[:-1, None] + h * GAUSS_NODES[None, :]
    return ends, nodes, h


def running_integral(values: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Running integral of an integrand sampled on per-step Gauss nodes.

    `values` has shape (n_steps, 4, ...).  Returns (at_ends, at_nodes):
    at_ends[i] is the integral from the start to step endpoint i (shape
    (n_steps+1, ...)), at_nodes[i, k] the integral up to node k of step i.
    """
    values = np.asarray(values)
    step_ints = h * np.tensordot(GAUSS_WEIGHTS, values, axes=([0], [1]))
    trailing = values.shape[2:]
    at_ends = np.zeros((values.shape[0] + 1,) + trailing, dtype=values.dtype)
    np.cumsum(step_ints, axis=0, out=at_ends[1:])
    partial = h * np.einsum("kj,sj...->sk...", PARTIAL_MATRIX, values)
    at_nodes = at_ends[:-1, None, ...] + partial
    return at_ends, at_nodes
