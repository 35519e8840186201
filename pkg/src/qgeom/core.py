"""Complex-Hermitian linear algebra, composite systems, states, channels, distances.

Everything operates on plain numpy arrays.  Validators (`as_hermitian`,
`as_density`) return the validated array so call sites can stay terse.
The composite-index convention is row-major with subsystem 1 most
significant: the basis vector |i_1 ... i_n> sits at flat index
i_1 * d_2*...*d_n + ... + i_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-9

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"i": np.eye(2, dtype=complex), "x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def as_hermitian(mat, tol=HERMITIAN_TOL):
    """Validate a square Hermitian matrix; returns it as a complex ndarray."""
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.conj().T).max() > tol * scale:
        raise ValueError("operator is not Hermitian within tolerance")
    return a


def as_density(mat, trace_tol=TRACE_TOL, psd_tol=PSD_TOL):
    """Validate a unit-trace positive-semidefinite operator."""
    rho = as_hermitian(mat, tol=max(HERMITIAN_TOL, 1e-11))
    tr = np.trace(rho)
    if abs(tr - 1.0) > max(trace_tol, 1e-9):
        raise ValueError(f"density matrix must have unit trace, got {tr}")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -psd_tol * max(abs(w[-1]), 1.0):
        raise ValueError(f"density matrix has negative eigenvalue {w[0]}")
    return rho


def check_dims(dims, dim):
    """Validate that the local dimensions multiply to the operator dimension."""
    dims = tuple(int(d) for d in dims)
    if any(d <= 0 for d in dims):
        raise ValueError(f"local dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != dim:
        raise ValueError(f"local dimensions {dims} do not multiply to {dim}")
    return dims


def hermitian_eigensystem(a):
    """Ascending eigenvalues and orthonormal eigenvector columns of a Hermitian matrix."""
    a = as_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w, v


def tensor(*ops):
    """Kronecker product; the first factor is the most significant index."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(m, dims, which):
    """Trace out subsystem `which` (0-based) of an operator on prod(dims)."""
    m = np.asarray(m, dtype=complex)
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    if not 0 <= which < n:
        raise IndexError(f"subsystem index {which} out of range for {n} factors")
    r = m.reshape(dims + dims)
    r = np.trace(r, axis1=which, axis2=n + which)
    keep = int(np.prod([d for i, d in enumerate(dims) if i != which]))
    return r.reshape(keep, keep)


def partial_transpose(m, dims, which):
    """Transpose the tensor factor `which` (0-based) only; involutive."""
    m = np.asarray(m, dtype=complex)
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    if not 0 <= which < n:
        raise IndexError(f"subsystem index {which} out of range for {n} factors")
    r = m.reshape(dims + dims)
    perm = list(range(2 * n))
    perm[which], perm[n + which] = perm[n + which], perm[which]
    return r.transpose(perm).reshape(m.shape)


def expectation(x, rho, imag_tol=1e-10):
    """<X>_rho = Tr X rho; the tiny imaginary residue is checked and dropped."""
    x = np.asarray(x, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if x.shape != rho.shape:
        raise ValueError(f"dimension mismatch {x.shape} vs {rho.shape}")
    val = np.trace(x @ rho)
    scale = max(abs(val), 1.0)
    if abs(val.imag) > imag_tol * scale:
        raise ValueError(f"expectation value has imaginary residue {val.imag}")
    return float(val.real)


def hs_distance(x, y):
    """Hilbert-Schmidt (Frobenius) distance sqrt(Tr[(X-Y)(X-Y)^dag])."""
    d = np.asarray(x, dtype=complex) - np.asarray(y, dtype=complex)
    return float(np.sqrt(np.sum(np.abs(d) ** 2)))


def psd_sqrt(m):
    """Square root of a PSD matrix via eigendecomposition, negative eigenvalues clipped."""
    w, v = np.linalg.eigh(np.asarray(m, dtype=complex))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def bures_distance(rho, sigma):
    """Bures-Uhlmann distance, D^2 = 2(1 - Tr sqrt(sqrt(rho) sigma sqrt(rho)))."""
    rho = as_density(rho)
    sigma = as_density(sigma)
    s = psd_sqrt(rho)
    fid = np.trace(psd_sqrt(s @ sigma @ s)).real
    return float(np.sqrt(max(2.0 * (1.0 - min(fid, 1.0)), 0.0)))


@dataclass(frozen=True)
class KrausChannel:
    """A quantum channel given by its Kraus operators {K_i}.

    Trace preserving (sum K^dag K = 1) unless `sub_normalized` is set, in
    which case sum K^dag K <= 1 is accepted (e.g. a channel restricted to
    the support of a reference state).
    """

    kraus: tuple
    sub_normalized: bool = False

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise ValueError("all Kraus operators must share one shape")
        object.__setattr__(self, "kraus", ks)
        s = sum(k.conj().T @ k for k in ks)
        eye = np.eye(shape[1])
        if self.sub_normalized:
            w = np.linalg.eigvalsh(s - eye)
            if w[-1] > PSD_TOL:
                raise ValueError("sub-normalized channel has sum K^dag K > 1")
        elif np.abs(s - eye).max() > 1e-9:
            raise ValueError("channel is not trace preserving within 1e-9")

    @property
    def dim_in(self):
        return self.kraus[0].shape[1]

    @property
    def dim_out(self):
        return self.kraus[0].shape[0]


def apply_channel(ch: KrausChannel, rho):
    """sum_i K_i rho K_i^dag, validated as a state for trace-preserving channels."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[0] != ch.dim_in:
        raise ValueError(f"state dimension {rho.shape[0]} != channel input {ch.dim_in}")
    out = sum(k @ rho @ k.conj().T for k in ch.kraus)
    if not ch.sub_normalized:
        return as_density(out)
    return out


def max_entangled(d):
    """|omega> = 1/sqrt(d) sum_i |ii>, carrying the normalisation explicitly."""
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0 / np.sqrt(d)
    return v


def choi_state(ch: KrausChannel):
    """Unit-trace Choi state Phi = (id (x) E)(|omega><omega|) of a square channel."""
    if ch.dim_in != ch.dim_out:
        raise ValueError("Choi state requires a square channel")
    d = ch.dim_in
    phi = np.zeros((d * d, d * d), dtype=complex)
    for k in ch.kraus:
        m = tensor(np.eye(d), k) @ max_entangled(d)
        phi += np.outer(m, m.conj())
    return phi


def choi_matrix_of_map(apply_fn, d):
    """Choi matrix (id (x) F)(|omega><omega|) of an arbitrary linear map F.

    Not necessarily PSD; useful for probing non-CP maps such as transpose.
    """
    phi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            phi += tensor(e, apply_fn(e)) / d
    return phi


def choi_apply(choi, rho):
    """Recover E(rho) = d * Tr_A[(rho^T (x) 1) Phi] from a unit-trace Choi state."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    m = tensor(rho.T, np.eye(d)) @ np.asarray(choi, dtype=complex)
    return d * partial_trace(m, (d, d), 0)


def _as_half_integer(j):
    jf = j if isinstance(j, Fraction) else Fraction(j).limit_denominator(2)
    if abs(float(jf) - float(j)) > 1e-12 or jf < 0 or jf.denominator not in (1, 2):
        raise ValueError(f"invalid spin quantum number {j}")
    return jf


def spin_operators(j):
    """Spin matrices (J_X, J_Y, J_Z) of size 2j+1 in the descending-m J_Z eigenbasis."""
    jf = _as_half_integer(j)
    two_j = int(2 * jf)
    dim = two_j + 1
    jj = float(jf)
    ms = [jj - k for k in range(dim)]
    jx = np.zeros((dim, dim), dtype=complex)
    jy = np.zeros((dim, dim), dtype=complex)
    for a, n in enumerate(ms):
        for b, m in enumerate(ms):
            if abs(n - m - 1) < 1e-9:
                c = 0.5 * np.sqrt(jj * (jj + 1) - n * m)
                jx[a, b] += c
                jy[a, b] += -1j * c
            if abs(n - m + 1) < 1e-9:
                c = 0.5 * np.sqrt(jj * (jj + 1) - n * m)
                jx[a, b] += c
                jy[a, b] += 1j * c
    jz = np.diag(np.array(ms, dtype=complex))
    return jx, jy, jz


# ---------------------------------------------------------------------------
# random instances (seeded) used across modules and tests


def random_hermitian(dim, rng):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def random_pure(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# JSON exchange format: {"dim": n, "re": [[...]], "im": [[...]]}


def operator_to_json(op):
    a = np.asarray(op, dtype=complex)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def operator_from_json(doc):
    dim = int(doc["dim"])
    re = np.array(doc["re"], dtype=float)
    im = np.array(doc.get("im", np.zeros_like(re)), dtype=float)
    a = re + 1j * im
    if a.shape != (dim, dim):
        raise ValueError(f"operator payload shape {a.shape} != declared dim {dim}")
    return a
