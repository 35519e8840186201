import numpy as np
import pytest

from qgeom import core
from qgeom.core import PAULI_X, PAULI_Y, PAULI_Z, partial_transpose, tensor
from qgeom.entangle import (
    Graph,
    ProductAnsatz,
    clique_matrix,
    gellmann_basis,
    is_ppt_by_duality,
    ppt_duality_check,
    ppt_max,
    ppt_numerical_range,
    qubit_qudit_sep_max,
    schmidt2_max,
    seesaw_product_max,
    sep_numerical_range,
)
from qgeom.numrange import jnr_approximate, sphere_directions


def bell_projector():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return np.outer(v, v.conj())


def test_seesaw_product_operator(rng):
    a = core.random_hermitian(2, rng)
    a = a @ a.conj().T  # PSD
    b = core.random_hermitian(3, rng)
    b = b @ b.conj().T
    h = tensor(a, b)
    res = seesaw_product_max(h, (2, 3), restarts=8, seed=3)
    expect = np.linalg.eigvalsh(a)[-1] * np.linalg.eigvalsh(b)[-1]
    assert res.lower == pytest.approx(expect, rel=1e-9)
    assert res.witness.expectation(h) == pytest.approx(res.lower, abs=1e-9)


def test_seesaw_bell():
    res = seesaw_product_max(bell_projector(), (2, 2), restarts=8, seed=0)
    assert res.lower == pytest.approx(0.5, abs=1e-9)


def test_seesaw_tripartite(rng):
    # product operator over three factors
    mats = []
    for d in (2, 2, 2):
        m = core.random_hermitian(d, rng)
        mats.append(m @ m.conj().T)
    h = tensor(*mats)
    res = seesaw_product_max(h, (2, 2, 2), restarts=8, seed=1)
    expect = np.prod([np.linalg.eigvalsh(m)[-1] for m in mats])
    assert res.lower == pytest.approx(expect, rel=1e-8)


def test_qubit_qudit_product_degenerate(rng):
    x = core.random_hermitian(3, rng)
    h = tensor(np.eye(2), x)
    b = qubit_qudit_sep_max(h, (2, 3), directions=200)
    lam = np.linalg.eigvalsh(x)[-1]
    assert b.lower == pytest.approx(lam, abs=1e-9)
    assert b.upper == pytest.approx(lam, abs=1e-9)


def test_qubit_qudit_bell_brackets():
    h = bell_projector()
    gaps = []
    for dirs in (100, 400):
        b = qubit_qudit_sep_max(h, (2, 2), directions=dirs, seed=0)
        assert b.lower <= 0.5 + 1e-9
        assert b.upper >= 0.5 - 1e-9
        # the witness attains the reported lower bound
        assert b.witness.expectation(h) == pytest.approx(b.lower, abs=1e-9)
        gaps.append(b.upper - b.lower)
    assert gaps[1] <= gaps[0] + 1e-9


def test_qubit_qudit_h0_proportional_identity(rng):
    # no identity component on the qubit side: H_0 = 0
    from qgeom.entangle import _pauli_reductions
    from qgeom.numrange import support, unit

    bs = [core.random_hermitian(3, rng) for _ in range(3)]
    h = sum(tensor(s, b) for s, b in zip((PAULI_X, PAULI_Y, PAULI_Z), bs))
    hs = _pauli_reductions(h, (2, 3))
    assert np.abs(hs[0]).max() < 1e-12
    full = qubit_qudit_sep_max(h, (2, 3), directions=500, seed=0)
    # reduced route: the same sweep on W(H_1, H_2, H_3) alone
    reduced = -np.inf
    for n in sphere_directions(3, 500, seed=1):
        s = support(hs[1:], n)
        reduced = max(reduced, 0.5 * np.linalg.norm(s.point))
    assert abs(full.lower - reduced) < 1e-8


def test_qubit_qudit_sandwiches_seesaw(rng):
    # 50 random qubit-qutrit observables: lower <= see-saw best <= upper
    for _ in range(50):
        h = core.random_hermitian(6, rng)
        b = qubit_qudit_sep_max(h, (2, 3), directions=250, seed=0)
        ss = seesaw_product_max(h, (2, 3), restarts=12, seed=5)
        assert b.lower <= ss.lower + 1e-8
        assert ss.lower <= b.upper + 1e-8


def test_sep_range_single_subsystem_equals_jnr(rng):
    ops = [core.random_hermitian(3, rng) for _ in range(2)]
    dirs = sphere_directions(2, 60)
    sep = sep_numerical_range(ops, (3,), dirs)
    jnr = jnr_approximate(ops, dirs)
    assert np.abs(sep.outer_offsets - jnr.outer_offsets).max() < 1e-12


def test_sep_range_embedded_qubit_triple():
    # A_i = 0 (+) sigma_i (+) 0 on two qubits: separable range strictly inside
    ops = []
    for s in (PAULI_X, PAULI_Y, PAULI_Z):
        a = np.zeros((4, 4), dtype=complex)
        a[1:3, 1:3] = s
        ops.append(a)
    dirs = sphere_directions(3, 120)
    sep = sep_numerical_range(ops, (2, 2), dirs, inner_directions=200)
    jnr = jnr_approximate(ops, dirs)
    assert sep.meta["outer_rigorous"]
    gaps = jnr.outer_offsets - sep.outer_offsets
    assert gaps.min() > -1e-8  # W_SEP inside W
    assert gaps.max() > 0.05  # strictly inside along some direction
    # pointwise containment of separable inner vertices in W's outer set
    s = jnr.outer_normals @ sep.inner_vertices.T - jnr.outer_offsets[:, None]
    assert s.max() < 1e-8


def test_sep_range_heuristic_path_consistent(rng):
    # qutrit-qutrit split: see-saw per direction, outer flagged heuristic
    ops = [core.random_hermitian(9, rng) for _ in range(2)]
    dirs = sphere_directions(2, 16)
    body = sep_numerical_range(ops, (3, 3), dirs, restarts=6, seed=2)
    assert not body.meta["outer_rigorous"]
    assert body.inner_in_outer(tol=1e-9)
    # W_SEP sits inside the full joint numerical range pointwise
    jnr = jnr_approximate(ops, dirs)
    s = jnr.outer_normals @ body.inner_vertices.T - jnr.outer_offsets[:, None]
    assert s.max() < 1e-8


def test_ppt_duality_qubit_qutrit():
    rep = ppt_duality_check((2, 3), samples=20, seed=5)
    assert rep["agree"] == rep["total"]


def test_ppt_max_identity():
    res = ppt_max(np.eye(4), (2, 2))
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_ppt_equals_seesaw_two_qubits(rng):
    for k in range(5):
        h = core.random_hermitian(4, rng)
        pv = ppt_max(h, (2, 2)).value
        sv = seesaw_product_max(h, (2, 2), restarts=16, seed=k).lower
        assert abs(pv - sv) < 1e-4


def test_ppt_value_ordering_qutrit_pair(rng):
    v = np.zeros(9, dtype=complex)
    v[0] = v[4] = v[8] = 1 / np.sqrt(3)
    h = np.outer(v, v.conj())
    res = ppt_max(h, (3, 3))
    ss = seesaw_product_max(h, (3, 3), restarts=16, seed=2)
    assert res.value >= ss.lower - 1e-7
    assert res.value <= np.linalg.eigvalsh(h)[-1] + 1e-9
    # the PPT iterate is feasible on both cones
    assert np.linalg.eigvalsh(res.state)[0] > -1e-8
    assert np.linalg.eigvalsh(partial_transpose(res.state, (3, 3), 0))[0] > -1e-8


def test_ppt_range_contains_maximally_mixed(rng):
    ops = [core.random_hermitian(4, rng) for _ in range(2)]
    body = ppt_numerical_range(ops, (2, 2), sphere_directions(2, 24), tol=1e-7)
    center = np.array([core.expectation(x, np.eye(4) / 4) for x in ops])
    assert body.outer_contains(center, tol=1e-6)
    assert body.inner_in_outer(tol=1e-6)


def test_gellmann_orthonormal():
    basis = gellmann_basis(3)
    assert len(basis) == 8
    for i, a in enumerate(basis):
        assert abs(np.trace(a)) < 1e-12
        for j, b in enumerate(basis):
            ip = np.trace(a.conj().T @ b).real
            assert abs(ip - (1.0 if i == j else 0.0)) < 1e-12


def test_ppt_duality_random_states(rng):
    rep = ppt_duality_check((2, 2), samples=40, seed=3)
    assert rep["agree"] == rep["total"]


def test_ppt_duality_separable_always_inside(rng):
    for _ in range(100):
        ra = core.random_density(2, rng)
        rb = core.random_density(2, rng)
        t = rng.random()
        rho = t * tensor(ra, rb) + (1 - t) * tensor(
            core.random_density(2, rng), core.random_density(2, rng)
        )
        assert is_ppt_by_duality(rho, (2, 2))


def test_ppt_duality_excludes_bell():
    assert not is_ppt_by_duality(bell_projector(), (2, 2))


def test_schmidt2_bell_reachable():
    res = schmidt2_max(bell_projector(), (2, 2), restarts=8, seed=1)
    assert res.value == pytest.approx(1.0, abs=1e-8)
    assert abs(res.chi - res.value) < 1e-8


def test_schmidt2_diagonal_product_reduces_to_seesaw(rng):
    h = tensor(np.diag([0.3, 1.1]), np.diag([0.2, 0.9, 1.4]))
    s2 = schmidt2_max(h, (2, 3), restarts=8, seed=0)
    ss = seesaw_product_max(h, (2, 3), restarts=8, seed=0)
    assert s2.value >= ss.lower - 1e-9
    assert s2.value == pytest.approx(np.linalg.eigvalsh(h)[-1], abs=1e-7)


def test_schmidt2_sandwich(rng):
    for _ in range(4):
        h = core.random_hermitian(9, rng)
        s2 = schmidt2_max(h, (3, 3), restarts=10, seed=7)
        ss = seesaw_product_max(h, (3, 3), restarts=10, seed=7)
        assert s2.value >= ss.lower - 1e-9
        assert s2.value <= np.linalg.eigvalsh(h)[-1] + 1e-9
        # pair orthogonality on the constrained side
        a1, b1 = s2.pair[0].factors
        a2, b2 = s2.pair[1].factors
        overlap = abs(np.vdot(np.kron(a1, b1), np.kron(a2, b2)))
        assert overlap < 1e-8


def test_chain_of_inclusions(rng):
    for _ in range(5):
        h = core.random_hermitian(4, rng)
        ss = seesaw_product_max(h, (2, 2), restarts=16, seed=0).lower
        pv = ppt_max(h, (2, 2)).value
        lam = np.linalg.eigvalsh(h)[-1]
        assert ss <= pv + 1e-5
        assert pv <= lam + 1e-9


def test_clique_matrix_empty_and_validation():
    g = Graph(3, [])
    assert np.abs(clique_matrix(g)).max() == 0.0
    with pytest.raises(ValueError):
        Graph(3, [(0, 0)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 5)])
    with pytest.raises(ValueError):
        clique_matrix(Graph(5, []))


def test_clique_matrix_single_edge():
    a = clique_matrix(Graph(2, [(0, 1)]))
    assert a.shape == (4, 4)
    w = np.linalg.eigvalsh(a)
    assert w[0] > -1e-12  # PSD
    assert w[-1] == pytest.approx(1.0)
    res = seesaw_product_max(a, (2, 2), restarts=16, seed=0)
    assert res.lower == pytest.approx(0.5, abs=1e-8)


def test_clique_matrix_triangle():
    a = clique_matrix(Graph(3, [(0, 1), (0, 2), (1, 2)]))
    assert np.abs(a - a.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(a)[0] > -1e-12
    res = seesaw_product_max(a, (3, 3), restarts=32, seed=0)
    assert res.lower == pytest.approx(2 / 3, abs=1e-8)


def test_block_positivity_screening(rng):
    # SWAP is block positive: <ab|SWAP|ab> = |<a|b>|^2 >= 0
    d = 3
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    res = seesaw_product_max(-swap, (d, d), restarts=16, seed=0)
    assert res.lower <= 1e-9
    for _ in range(10000):
        a = core.random_pure(d, rng)
        b = core.random_pure(d, rng)
        v = np.kron(a, b)
        assert np.real(v.conj() @ swap @ v) >= -1e-9
