"""Gibbs states from a discretized transfer operator on word states.

States are words of a fixed depth k. The operator weight from state x to a
shift successor x' is the norm of the first symbol's matrix restricted to
the direction selected by x' inside a certificate cone. Left and right
Perron vectors give a stationary distribution on states whose prefix
marginals define a shift-invariant cylinder measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .projective import Multicone
from .semigroup import MatrixTuple, iter_levels
from .thermo import CylinderMeasure, PotentialModel, PreconditionFailed


class NoConvergence(RuntimeError):
    """Power iteration did not reach the tolerance in the budget."""


@dataclass(frozen=True)
class TransferSolution:
    """Perron data of the discretized transfer operator."""

    s: float
    depth: int
    eigenvalue: float
    measure: CylinderMeasure
    right_vector: np.ndarray   # Perron eigenvector of the weight matrix
    left_vector: np.ndarray
    residual: float
    potential: PotentialModel  # depth k+1 potential realized by the weights
    steering_direction: float
    relaxed: bool = False      # certificate was invariant-unstable, not strict

    @property
    def pressure(self) -> float:
        return math.log(self.eigenvalue)


def _steering_direction(cone: Multicone) -> float:
    return max(cone.arcs, key=lambda a: a.length).midpoint


def transfer_equilibrium(t: MatrixTuple, s: float, cone: Multicone, depth: int,
                         tol=1e-12, max_iter=200_000,
                         relaxed=False) -> TransferSolution:
    """Solve the depth-k discretized transfer operator at exponent s.

    Requires a certificate cone; its longest arc's midpoint seeds the
    direction of every state. Raises NoConvergence if power iteration
    fails to settle and PreconditionFailed on a missing cone.
    """
    if cone is None:
        raise PreconditionFailed("a certificate cone is required")
    if depth < 1:
        raise PreconditionFailed("transfer depth must be at least 1")
    n = len(t)
    k = depth
    c0 = _steering_direction(cone)
    # directions of all depth-k states: angle of A_x applied to c0
    prods = None
    for m, level, _logs in iter_levels(t, k):
        if m == k:
            prods = level
    vec = np.array([math.cos(c0), math.sin(c0)])
    img = prods @ vec
    angles = np.arctan2(img[:, 1], img[:, 0]) % math.pi
    # weight of moving from any state starting with symbol i into state x'
    dirs = np.stack([np.cos(angles), np.sin(angles)])  # (2, K)
    weights = np.empty((n, n**k))
    for i, mat in enumerate(t.mats):
        im = mat @ dirs
        weights[i] = np.hypot(im[0], im[1]) ** s
    size = n**k
    block = n ** (k - 1)
    state_idx = np.arange(size)
    first_sym = state_idx // block
    succ_base = (state_idx % block) * n
    rows = np.repeat(state_idx, n)
    cols = (succ_base[:, None] + np.arange(n)).ravel()
    vals = weights[np.repeat(first_sym, n), cols]
    g = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    lam_r, right = _power_iteration(g, tol, max_iter)
    lam_l, left = _power_iteration(g.T.tocsr(), tol, max_iter)
    lam = 0.5 * (lam_r + lam_l)
    res_r = float(np.max(np.abs(g @ right - lam * right))) / (lam * float(np.max(right)))
    res_l = float(np.max(np.abs(g.T @ left - lam * left))) / (lam * float(np.max(left)))
    pi = left * right
    pi /= float(np.sum(pi))
    measure = CylinderMeasure.from_state_distribution(pi, n, k, invariant=True)
    potential = PotentialModel(n, k + 1, np.log(weights).reshape(-1),
                               note="transfer weights")
    return TransferSolution(s, k, lam, measure, right, left,
                            max(res_r, res_l), potential, c0, relaxed)


def _power_iteration(g, tol, max_iter):
    size = g.shape[0]
    v = np.full(size, 1.0 / size)
    lam = 1.0
    for _ in range(max_iter):
        w = g @ v
        total = float(np.sum(w))
        if total <= 0.0 or not np.isfinite(total):
            raise NoConvergence("iteration left the positive cone")
        w /= total
        if abs(total - lam) <= tol * max(1.0, total) and \
                float(np.max(np.abs(w - v))) <= tol:
            return total, w
        v, lam = w, total
    raise NoConvergence(f"no convergence after {max_iter} iterations")
