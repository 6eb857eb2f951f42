import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vbaisac.errors import DegenerateError
from vbaisac.manifold import (KroneckerObjective, QuadraticObjective, euclidean_gradient,
                              project_tangent, retract, riemannian_cg, unit_modulus,
                              write_trace)


def random_objective(seed, n, m=None, rho=0.5):
    rng = np.random.default_rng(seed)
    m = m or n + 2
    Q = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    b1 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    b2 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return QuadraticObjective.from_targets(Q, b1, b2, rho), (Q, b1, b2, rho)


def direct_value(args, p):
    Q, b1, b2, rho = args
    return rho * np.linalg.norm(Q @ p - b1) ** 2 + (1 - rho) * np.linalg.norm(Q @ p - b2) ** 2


def coordinate_descent_oracle(Q, target, n, grid=360, starts=8, seed=0):
    """Best value of phase-grid coordinate descent, refined by exact coordinate steps.

    Each sweep first picks every entry from a ``grid``-point phase grid, then
    finishes with the closed-form per-entry minimiser ``p_i = -c / |c|``.
    """
    G = Q.conj().T @ Q
    q = Q.conj().T @ target
    value = lambda p: np.vdot(p, G @ p).real - 2 * np.vdot(q, p).real
    phases = np.exp(2j * np.pi * np.arange(grid) / grid)
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(starts):
        p = rng.choice(phases, n)
        for i in range(n):
            cand = np.repeat(p[None, :], grid, axis=0)
            cand[:, i] = phases
            p = cand[int(np.argmin([value(c) for c in cand]))]
        f = value(p)
        for _ in range(100_000):
            for i in range(n):
                c = G[i] @ p - G[i, i] * p[i] - q[i]
                p[i] = -c / abs(c)
            prev, f = f, value(p)
            if prev - f < 1e-15:
                break
        best = min(best, f)
    return best


def test_expanded_value_matches_definition():
    obj, args = random_objective(0, 5)
    p = unit_modulus(np.random.default_rng(1).uniform(0, 6, 5))
    assert obj.value(p) == pytest.approx(direct_value(args, p))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000))
def test_gradient_matches_finite_differences(seed):
    obj, _ = random_objective(seed, 4)
    rng = np.random.default_rng(seed)
    p = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    g = euclidean_gradient(obj, p)
    h = 1e-6
    for k in range(4):
        for d in (1.0, 1j):
            e = np.zeros(4, complex)
            e[k] = d * h
            fd = (obj.value(p + e) - obj.value(p - e)) / (2 * h)
            assert fd == pytest.approx(np.real(np.conj(g[k]) * d), rel=1e-5, abs=1e-6)


def test_tangent_and_retraction():
    rng = np.random.default_rng(2)
    p = unit_modulus(rng.uniform(0, 6, 6))
    v = project_tangent(p, rng.standard_normal(6) + 1j * rng.standard_normal(6))
    np.testing.assert_allclose((v * p.conj()).real, 0, atol=1e-14)
    np.testing.assert_allclose(np.abs(retract(p, v)), 1.0)
    with pytest.raises(DegenerateError, match="degenerate-retraction"):
        retract(p, -p)


def test_identity_problem_aligns_phases():
    u = unit_modulus(np.random.default_rng(3).uniform(0, 6, 8))
    obj = QuadraticObjective.from_targets(np.eye(8, dtype=complex), u, u, 0.5)
    res = riemannian_cg(obj, unit_modulus(np.zeros(8)))
    assert res.converged
    np.testing.assert_allclose(res.point, u, atol=1e-6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cg_reaches_phase_grid_oracle(seed):
    obj, (Q, *_) = random_objective(seed, 4)
    oracle = coordinate_descent_oracle(Q, obj.target, 4, seed=seed) + obj.constant
    rng = np.random.default_rng(seed)
    best = min(riemannian_cg(obj, unit_modulus(rng.uniform(0, 2 * np.pi, 4))).value
               for _ in range(10))
    assert abs(best - oracle) < 1e-6


def test_trace_is_monotone_and_feasible():
    obj, _ = random_objective(7, 10, m=14)
    start = unit_modulus(np.random.default_rng(7).uniform(0, 6, 10))
    res = riemannian_cg(obj, start)
    vals = [row["objective"] for row in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    np.testing.assert_allclose(np.abs(res.point), 1.0, atol=1e-12)


def test_kronecker_objective_matches_dense():
    rng = np.random.default_rng(4)
    n, k, s = 6, 3, 2
    F = rng.standard_normal((k, s)) + 1j * rng.standard_normal((k, s))
    b1 = rng.standard_normal(n * s) + 1j * rng.standard_normal(n * s)
    b2 = rng.standard_normal(n * s) + 1j * rng.standard_normal(n * s)
    fact = KroneckerObjective.from_targets(F, n, b1, b2, 0.3)
    dense = QuadraticObjective.from_targets(np.kron(F.T, np.eye(n)), b1, b2, 0.3)
    P = unit_modulus(rng.uniform(0, 6, (n, k)))
    p = P.reshape(-1, order="F")
    np.testing.assert_allclose(fact.apply(p), (P @ F).reshape(-1, order="F"))
    np.testing.assert_allclose(fact.apply(p), dense.apply(p))
    assert fact.value(p) == pytest.approx(dense.value(p))
    np.testing.assert_allclose(fact.gradient(p), dense.gradient(p), atol=1e-12)
    np.testing.assert_allclose(fact.q_matrix, dense.q_matrix)


def test_trace_csv(tmp_path):
    obj, _ = random_objective(1, 3)
    res = riemannian_cg(obj, unit_modulus(np.zeros(3)), max_iter=5)
    write_trace(tmp_path / "t.csv", res)
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert rows[0] == "iteration,objective,gradnorm,step"
    assert len(rows) == len(res.trace) + 1
