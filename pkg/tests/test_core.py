import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgeom import core, wigner
from qgeom.core import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    KrausChannel,
    apply_channel,
    as_density,
    as_hermitian,
    bures_distance,
    choi_apply,
    choi_matrix_of_map,
    choi_state,
    expectation,
    hermitian_eigensystem,
    hs_distance,
    max_entangled,
    partial_trace,
    partial_transpose,
    spin_operators,
    tensor,
)


def test_eigensystem_diagonal():
    w, v = hermitian_eigensystem(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])


def test_eigensystem_pauli_x():
    w, _ = hermitian_eigensystem(PAULI_X)
    assert np.allclose(w, [-1, 1])


def test_eigensystem_reconstruction(rng):
    a = core.random_hermitian(8, rng)
    w, v = hermitian_eigensystem(a)
    assert np.abs(a - (v * w) @ v.conj().T).max() < 1e-9 * np.abs(a).max()
    assert np.abs(v.conj().T @ v - np.eye(8)).max() < 1e-10


def test_eigensystem_rejects_bad_input():
    with pytest.raises(ValueError):
        hermitian_eigensystem(np.ones((2, 3)))
    with pytest.raises(ValueError):
        hermitian_eigensystem(np.array([[0, 1], [0, 0]], dtype=complex))


def test_tensor_identity():
    assert np.allclose(tensor(np.eye(2), np.eye(3)), np.eye(6))


def test_tensor_zz_spectrum():
    w = np.linalg.eigvalsh(tensor(PAULI_Z, PAULI_Z))
    assert np.allclose(w, [-1, -1, 1, 1])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_tensor_trace_multiplicative(seed):
    rng = np.random.default_rng(seed)
    a = core.random_hermitian(3, rng)
    b = core.random_hermitian(2, rng)
    assert abs(np.trace(tensor(a, b)) - np.trace(a) * np.trace(b)) < 1e-10


def test_partial_trace_product(rng):
    rho = core.random_density(2, rng)
    sig = core.random_hermitian(3, rng)
    out = partial_trace(tensor(rho, sig), (2, 3), 1)
    assert np.allclose(out, rho * np.trace(sig))


def test_partial_trace_max_entangled():
    for d in (2, 3, 5):
        omega = max_entangled(d)
        rho = np.outer(omega, omega.conj())
        out = partial_trace(rho, (d, d), 1)
        assert np.abs(out - np.eye(d) / d).max() < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_partial_trace_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    m = core.random_hermitian(6, rng)
    for which in (0, 1):
        assert abs(np.trace(partial_trace(m, (2, 3), which)) - np.trace(m)) < 1e-10


def test_partial_trace_index_error():
    with pytest.raises(IndexError):
        partial_trace(np.eye(6), (2, 3), 2)


def test_partial_operations_three_factors(rng):
    parts = [core.random_hermitian(d, rng) for d in (2, 3, 2)]
    m = tensor(*parts)
    mid = partial_trace(partial_trace(m, (2, 3, 2), 2), (2, 3), 0)
    assert np.allclose(mid, parts[1] * np.trace(parts[0]) * np.trace(parts[2]))
    pt = partial_transpose(m, (2, 3, 2), 1)
    assert np.allclose(pt, tensor(parts[0], parts[1].T, parts[2]))


def test_partial_transpose_product_state(rng):
    ra = core.random_density(2, rng)
    rb = core.random_density(2, rng)
    out = partial_transpose(tensor(ra, rb), (2, 2), 0)
    assert np.allclose(out, tensor(ra.T, rb))
    as_density(out)  # still a valid state


def test_partial_transpose_bell():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    w = np.linalg.eigvalsh(partial_transpose(rho, (2, 2), 0))
    assert abs(w[0] - (-0.5)) < 1e-12


def test_partial_transpose_involution(rng):
    m = core.random_hermitian(6, rng)
    assert np.allclose(partial_transpose(partial_transpose(m, (2, 3), 0), (2, 3), 0), m)


def test_expectation_basics():
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert expectation(np.eye(2), rho) == pytest.approx(1.0)
    assert expectation(PAULI_Z, rho) == pytest.approx(1.0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_expectation_linear(seed):
    rng = np.random.default_rng(seed)
    x = core.random_hermitian(4, rng)
    y = core.random_hermitian(4, rng)
    rho = core.random_density(4, rng)
    a, b = rng.normal(size=2)
    lhs = expectation(a * x + b * y, rho)
    assert abs(lhs - a * expectation(x, rho) - b * expectation(y, rho)) < 1e-10


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(np.eye(2), np.eye(3) / 3)


def test_bures_self_distance(rng):
    rho = core.random_density(4, rng)
    assert bures_distance(rho, rho) < 1e-7


def test_bures_classical_hellinger(rng):
    # commuting states reduce to the Hellinger form 2(1 - sum sqrt(p q))
    p = rng.random(4) + 0.1
    p /= p.sum()
    q = rng.random(4) + 0.1
    q /= q.sum()
    d = bures_distance(np.diag(p), np.diag(q))
    expect = np.sqrt(2 * (1 - np.sum(np.sqrt(p * q))))
    assert abs(d - expect) < 1e-10


def test_bures_orthogonal_pure_states():
    a = np.diag([1.0, 0.0]).astype(complex)
    b = np.diag([0.0, 1.0]).astype(complex)
    assert bures_distance(a, b) == pytest.approx(np.sqrt(2.0), abs=1e-9)


def test_state_set_in_out_radii():
    # outradius R = sqrt((d-1)/d); inradius r = sqrt(1/(d(d-1)))
    for d in range(2, 7):
        psi = np.zeros(d, dtype=complex)
        psi[0] = 1.0
        proj = np.outer(psi, psi.conj())
        eye = np.eye(d) / d
        assert abs(hs_distance(eye, proj) - np.sqrt((d - 1) / d)) < 1e-12
        inner = (np.eye(d) - proj) / (d - 1)
        assert abs(hs_distance(eye, inner) - np.sqrt(1 / (d * (d - 1)))) < 1e-12


def test_identity_channel(rng):
    rho = core.random_density(3, rng)
    ch = KrausChannel((np.eye(3),))
    assert np.allclose(apply_channel(ch, rho), rho)


def test_depolarizing_twirl_channel(rng):
    # scaled WH displacements implement the completely depolarizing channel
    d = 3
    kraus = tuple(
        wigner.wh_displacement(x, q, (d,)) / d for x in range(d) for q in range(d)
    )
    ch = KrausChannel(kraus)
    rho = core.random_density(d, rng)
    assert np.abs(apply_channel(ch, rho) - np.eye(d) / d).max() < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_channel_output_psd(seed):
    rng = np.random.default_rng(seed)
    k1 = core.random_unitary(3, rng) * 0.6
    k2 = core.random_unitary(3, rng)
    # complete k2 so the pair is trace preserving
    s = k1.conj().T @ k1
    w, v = np.linalg.eigh(np.eye(3) - s)
    k2 = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    ch = KrausChannel((k1, k2))
    out = apply_channel(ch, core.random_density(3, rng))
    assert np.linalg.eigvalsh(out)[0] > -1e-10


def test_kraus_channel_validation():
    with pytest.raises(ValueError):
        KrausChannel((np.eye(2) * 0.5,))
    KrausChannel((np.eye(2) * 0.5,), sub_normalized=True)
    with pytest.raises(ValueError):
        KrausChannel((np.eye(2) * 1.5,), sub_normalized=True)


def test_choi_identity_channel():
    d = 3
    ch = KrausChannel((np.eye(d),))
    omega = max_entangled(d)
    assert np.abs(choi_state(ch) - np.outer(omega, omega.conj())).max() < 1e-12


def test_choi_of_transpose_map_not_cp():
    # Choi of transpose is SWAP/d: min eigenvalue -1/d
    d = 3
    phi = choi_matrix_of_map(lambda e: e.T, d)
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    assert np.abs(phi - swap / d).max() < 1e-12
    assert np.linalg.eigvalsh(phi)[0] == pytest.approx(-1 / d, abs=1e-12)


def test_choi_round_trip(rng):
    d = 3
    u1 = core.random_unitary(d, rng)
    u2 = core.random_unitary(d, rng)
    ch = KrausChannel((u1 * np.sqrt(0.3), u2 * np.sqrt(0.7)))
    phi = choi_state(ch)
    for _ in range(20):
        rho = core.random_density(d, rng)
        assert np.abs(choi_apply(phi, rho) - apply_channel(ch, rho)).max() < 1e-9


def test_spin_half_is_half_pauli():
    jx, jy, jz = spin_operators(0.5)
    assert np.allclose(jx, PAULI_X / 2)
    assert np.allclose(jy, PAULI_Y / 2)
    assert np.allclose(jz, PAULI_Z / 2)


def test_spin_one_jz():
    _, _, jz = spin_operators(1)
    assert np.allclose(np.diag(jz), [1, 0, -1])


def test_spin_casimir_and_commutator():
    j = 0.5
    while j <= 6:
        jx, jy, jz = spin_operators(j)
        dim = jx.shape[0]
        casimir = jx @ jx + jy @ jy + jz @ jz
        assert np.abs(casimir - j * (j + 1) * np.eye(dim)).max() < 1e-10
        assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() < 1e-12
        j += 0.5


def test_spin_invalid_j():
    with pytest.raises(ValueError):
        spin_operators(0.3)
    with pytest.raises(ValueError):
        spin_operators(-1)


def test_density_validation():
    with pytest.raises(ValueError):
        as_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        as_density(np.eye(2))  # trace 2


def test_qubit_psd_criterion_grid():
    # rho = 1/2 + x sx + y sy + z sz is a state iff x^2+y^2+z^2 <= 1/4
    axis = np.linspace(-0.6, 0.6, 20)
    for x in axis:
        for y in axis:
            for z in axis:
                rho = 0.5 * np.eye(2) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z
                w = np.linalg.eigvalsh(rho)
                inside = x * x + y * y + z * z <= 0.25 + 1e-12
                assert (w[0] >= -1e-12) == inside


def test_operator_json_round_trip(rng):
    a = core.random_hermitian(4, rng)
    doc = core.operator_to_json(a)
    b = core.operator_from_json(doc)
    assert np.abs(a - b).max() < 1e-15
