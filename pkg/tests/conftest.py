import itertools
import math

import numpy as np
import pytest

from nsl import KernelSpec, MetricMeasureSpace, ScalarField, SpaceSpec, build_space


@pytest.fixture
def two_point():
    """d = 1, both weights 1/2."""
    dist = np.array([[0.0, 1.0], [1.0, 0.0]])
    return MetricMeasureSpace(dist, np.array([0.5, 0.5]), name="two-point")


@pytest.fixture
def two_point_field():
    return ScalarField(np.array([0.0, 1.0]))


@pytest.fixture
def three_collinear():
    """Points 0, 1/2, 1 on a line, uniform weights 1/3."""
    x = np.array([0.0, 0.5, 1.0])
    dist = np.abs(x[:, None] - x[None, :])
    return MetricMeasureSpace(dist, np.full(3, 1.0 / 3.0), coords=x, name="three-collinear")


@pytest.fixture
def circle64():
    return build_space(SpaceSpec("circle", n=64))


@pytest.fixture
def interval128():
    return build_space(SpaceSpec("interval", n=128))


@pytest.fixture
def ahlfors1():
    return KernelSpec("ahlfors", 1.0)


def random_space(rng: np.random.Generator, n: int) -> MetricMeasureSpace:
    """Random points on a line: a genuine metric with nontrivial weights."""
    x = np.sort(rng.uniform(0.0, 1.0, n))
    while np.any(np.diff(x) < 1e-3):
        x = np.sort(rng.uniform(0.0, 1.0, n))
    dist = np.abs(x[:, None] - x[None, :])
    weights = rng.uniform(0.2, 1.0, n)
    return MetricMeasureSpace(dist, weights, coords=x, name="random-line")


def hajlasz_oracle_p2(weights, pairs, bounds):
    """Exact quadratic minimizer by active-set enumeration (small n only).

    Solves min g' diag(w) g subject to g_i + g_j >= c over all subsets of
    active constraints via the KKT system; dual-feasible solutions have
    g >= 0 automatically since c > 0.
    """
    n = len(weights)
    m = len(pairs)
    best = math.inf
    w = np.asarray(weights)
    for size in range(0, m + 1):
        for subset in itertools.combinations(range(m), size):
            a_mat = np.zeros((size, n))
            for row, idx in enumerate(subset):
                i, j = pairs[idx]
                a_mat[row, i] = 1.0
                a_mat[row, j] = 1.0
            kkt = np.zeros((n + size, n + size))
            kkt[:n, :n] = 2.0 * np.diag(w)
            kkt[:n, n:] = -a_mat.T
            kkt[n:, :n] = a_mat
            rhs = np.concatenate([np.zeros(n), [bounds[i] for i in subset]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            g, lam = sol[:n], sol[n:]
            if np.any(lam < -1e-9) or np.any(g < -1e-9):
                continue
            ok = all(g[i] + g[j] >= c - 1e-9 for (i, j), c in zip(pairs, bounds))
            if ok:
                best = min(best, float(np.sum(w * g**2)))
    return best
