"""Shared fixtures and oracles for the graphfb test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

import graphfb as gf
from graphfb import qecqp


def random_connected_graph(n: int, seed: int) -> gf.Graph:
    """Random geometric graph; the generator guarantees connectivity."""
    return gf.generate("random_geometric", n, seed=seed)


def random_problem(dim: int, seed: int) -> qecqp.QecqpProblem:
    """Random instance with R eigenvalues in {0, 2}, straddling 1.

    Mirrors the structure the basis construction produces: R = A^T J A + I
    has eigenvalues 0 and 2 exactly. Q is a random symmetric matrix.
    """
    rng = np.random.default_rng(seed)
    while True:
        z = rng.standard_normal((dim, dim))
        q = 0.5 * (z + z.T)
        zz = rng.standard_normal((dim, dim))
        basis, _ = np.linalg.qr(zz)
        k = int(rng.integers(1, dim))
        r = 2.0 * basis[:, :k] @ basis[:, :k].T
        r = 0.5 * (r + r.T)
        w = np.linalg.eigvalsh(r)
        if w[0] < 1.0 - 1e-6 and w[-1] > 1.0 + 1e-6:
            return qecqp.QecqpProblem(q, r)


def brute_force_max_cut(g: gf.Graph) -> float:
    """Exhaustive best cut over all bipartitions with both sides non-empty."""
    best = -np.inf
    w = g.weight_matrix
    for bits in itertools.product((0, 1), repeat=g.n - 1):
        side = np.array((1,) + bits, dtype=bool)
        if side.all():
            continue
        best = max(best, float(w[np.ix_(side, ~side)].sum()))
    return best


def all_cut_values(g: gf.Graph) -> np.ndarray:
    """Cut values of every bipartition (both sides non-empty)."""
    w = g.weight_matrix
    vals = []
    for bits in itertools.product((0, 1), repeat=g.n - 1):
        side = np.array((1,) + bits, dtype=bool)
        if side.all():
            continue
        vals.append(float(w[np.ix_(side, ~side)].sum()))
    return np.asarray(vals)


def dirichlet_double_sum(g: gf.Graph, f: np.ndarray) -> float:
    # Independent oracle: 1/2 sum_ij w_ij (f_i - f_j)^2 over ordered pairs.
    w = g.weight_matrix
    total = 0.0
    for i in range(g.n):
        for j in range(g.n):
            total += w[i, j] * (f[i] - f[j]) ** 2
    return 0.5 * total


@pytest.fixture
def path2() -> gf.Graph:
    return gf.generate("path", 2)


@pytest.fixture
def path3() -> gf.Graph:
    return gf.generate("path", 3)


@pytest.fixture
def path4() -> gf.Graph:
    return gf.generate("path", 4)


@pytest.fixture
def ring4() -> gf.Graph:
    return gf.generate("ring", 4)


@pytest.fixture
def k3() -> gf.Graph:
    return gf.generate("complete", 3)
