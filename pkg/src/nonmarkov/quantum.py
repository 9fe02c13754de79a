"""Dense finite-dimensional state algebra.

Entropies are in bits (log base 2); multiply by ``ln 2`` to convert to nats.
The trace distance is *unnormalized*, ``tr|rho - sigma|``, so it ranges over
``[0, 2]`` and two orthogonal pure states sit at distance 2.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidChannelError, InvalidStateError, PartitionError

MAX_DIM = 64
STATE_TOL = 1e-10
KRAUS_TOL = 1e-9

__all__ = [
    "DensityMatrix",
    "PureState",
    "von_neumann_entropy",
    "binary_entropy",
    "quantum_mutual_information",
    "trace_distance",
    "relative_entropy",
    "partial_trace",
    "partial_transpose",
    "apply_kraus",
    "tensor",
    "choi_state",
    "bloch_vector",
    "from_bloch",
]


def _infer_dims(side: int) -> tuple[int, ...]:
    n = int(round(math.log2(side))) if side > 0 else 0
    if side >= 2 and 2**n == side:
        return (2,) * n
    return (side,)


class DensityMatrix:
    """Positive, unit-trace complex matrix with a subsystem structure.

    ``dims`` lists subsystem dimensions; the matrix side is their product.
    Construction checks Hermiticity, trace and positivity to ``1e-10``.
    """

    __slots__ = ("data", "dims")

    def __init__(self, data, dims: Sequence[int] | None = None, *, validate: bool = True):
        arr = np.array(data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidStateError(f"expected a square matrix, got shape {arr.shape}")
        side = arr.shape[0]
        dims = tuple(int(d) for d in dims) if dims is not None else _infer_dims(side)
        if int(np.prod(dims)) != side:
            raise InvalidStateError(f"dims {dims} do not match matrix side {side}")
        if side > MAX_DIM:
            raise InvalidStateError(f"dimension {side} exceeds the supported maximum {MAX_DIM}")
        if validate:
            _check_state(arr)
        arr.setflags(write=False)
        self.data = arr
        self.dims = dims

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.data)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.data, self.data)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims}, data=\n{self.data!r})"


class PureState:
    """Unit-norm state vector with a subsystem structure."""

    __slots__ = ("amplitudes", "dims")

    def __init__(self, amplitudes, dims: Sequence[int] | None = None, *, normalize: bool = False):
        vec = np.array(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > STATE_TOL:
            raise InvalidStateError(f"state vector has norm {norm!r}")
        dims = tuple(int(d) for d in dims) if dims is not None else _infer_dims(vec.size)
        if int(np.prod(dims)) != vec.size:
            raise InvalidStateError(f"dims {dims} do not match vector length {vec.size}")
        vec.setflags(write=False)
        self.amplitudes = vec
        self.dims = dims

    def projector(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def __repr__(self) -> str:
        return f"PureState(dims={self.dims}, amplitudes={self.amplitudes!r})"


def _check_state(arr: np.ndarray) -> None:
    if np.max(np.abs(arr - arr.conj().T)) > STATE_TOL:
        raise InvalidStateError("matrix is not Hermitian")
    tr = np.trace(arr)
    if abs(tr - 1.0) > STATE_TOL:
        raise InvalidStateError(f"trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(arr)[0]
    if lo < -STATE_TOL:
        raise InvalidStateError(f"negative eigenvalue {lo!r}")


def _as_state(rho, dims=None) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        if dims is not None and tuple(dims) != rho.dims:
            return DensityMatrix(rho.data, dims, validate=False)
        return rho
    if isinstance(rho, PureState):
        return rho.projector()
    return DensityMatrix(rho, dims)


def _spectrum(arr: np.ndarray) -> np.ndarray:
    """Eigenvalues with jitter in [-1e-10, 0] clamped to zero."""
    lam = np.linalg.eigvalsh(arr)
    if lam[0] < -STATE_TOL:
        raise InvalidStateError(f"negative eigenvalue {lam[0]!r}")
    return np.clip(lam, 0.0, None)


def _entropy_of_spectrum(lam: np.ndarray) -> float:
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam)))


def binary_entropy(p: float) -> float:
    """Shannon entropy of the distribution ``{p, 1 - p}`` in bits."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def von_neumann_entropy(rho) -> float:
    """``S(rho) = -tr rho log2 rho`` in bits."""
    state = _as_state(rho)
    return _entropy_of_spectrum(_spectrum(state.data))


def partial_trace(rho, keep: Iterable[int], dims: Sequence[int] | None = None) -> DensityMatrix:
    """Reduce ``rho`` to the subsystems listed in ``keep`` (in ascending order)."""
    state = _as_state(rho, dims)
    dims = state.dims
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise PartitionError(f"subsystem indices {keep} out of range for dims {dims}")
    traced = [k for k in range(n) if k not in keep]
    t = state.data.reshape(dims + dims)
    # contract traced subsystems one at a time, highest index first
    for k in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + m)
    kept_dims = tuple(dims[k] for k in keep)
    side = int(np.prod(kept_dims)) if kept_dims else 1
    return DensityMatrix(t.reshape(side, side), kept_dims or (1,), validate=False)


def partial_transpose(rho, subsystem: int = 1, dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose the indices of one subsystem; returns a plain array."""
    state = _as_state(rho, dims)
    dims = state.dims
    n = len(dims)
    if not 0 <= subsystem < n:
        raise PartitionError(f"subsystem {subsystem} out of range for dims {dims}")
    t = state.data.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[subsystem], axes[subsystem + n] = axes[subsystem + n], axes[subsystem]
    return t.transpose(axes).reshape(state.dim, state.dim)


def _split(state: DensityMatrix, cut: int) -> tuple[list[int], list[int]]:
    n = len(state.dims)
    if not 1 <= cut < n:
        raise PartitionError(f"cut {cut} does not split dims {state.dims}")
    return list(range(cut)), list(range(cut, n))


def quantum_mutual_information(rho_ab, cut: int = 1, dims: Sequence[int] | None = None) -> float:
    """``I(A:B) = S(A) + S(B) - S(AB)`` with A the first ``cut`` subsystems."""
    state = _as_state(rho_ab, dims)
    a, b = _split(state, cut)
    s_a = von_neumann_entropy(partial_trace(state, a))
    s_b = von_neumann_entropy(partial_trace(state, b))
    return s_a + s_b - von_neumann_entropy(state)


def trace_distance(rho, sigma) -> float:
    """Unnormalized trace distance ``tr|rho - sigma|`` (no factor 1/2)."""
    a = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    b = sigma.data if isinstance(sigma, DensityMatrix) else np.asarray(sigma, dtype=complex)
    if isinstance(rho, DensityMatrix) and isinstance(sigma, DensityMatrix) and rho.dims != sigma.dims:
        raise ValueError(f"dimension mismatch: {rho.dims} vs {sigma.dims}")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.linalg.svd(a - b, compute_uv=False)))


def relative_entropy(rho, sigma, *, support_tol: float = 1e-12) -> float:
    """``D(rho || sigma) = tr rho (log2 rho - log2 sigma)``.

    Returns ``math.inf`` when the support of ``rho`` is not contained in the
    support of ``sigma``.
    """
    r = _as_state(rho)
    s = _as_state(sigma)
    if r.data.shape != s.data.shape:
        raise ValueError(f"dimension mismatch: {r.dims} vs {s.dims}")
    lam_s, vec_s = np.linalg.eigh(s.data)
    # weight of rho on each eigenvector of sigma
    weights = np.real(np.einsum("ji,jk,ki->i", vec_s.conj(), r.data, vec_s))
    null = lam_s <= support_tol
    if np.any(weights[null] > support_tol):
        return math.inf
    cross = float(np.sum(weights[~null] * np.log2(lam_s[~null])))
    value = -von_neumann_entropy(r) - cross
    return max(value, 0.0) if value > -1e-12 else value


def _kraus_list(channel) -> list[np.ndarray]:
    kraus = getattr(channel, "kraus", channel)
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    if not ops:
        raise InvalidChannelError("empty Kraus list")
    return ops


def check_kraus(kraus: Sequence[np.ndarray], tol: float = KRAUS_TOL) -> None:
    d = kraus[0].shape[1]
    total = sum(k.conj().T @ k for k in kraus)
    err = np.max(np.abs(total - np.eye(d)))
    if err > tol:
        raise InvalidChannelError(f"Kraus completeness violated by {err:.3e}")


def apply_kraus(rho, channel) -> DensityMatrix:
    """Apply a channel given as a snapshot or a sequence of Kraus operators."""
    ops = _kraus_list(channel)
    check_kraus(ops)
    state = _as_state(rho)
    out = sum(k @ state.data @ k.conj().T for k in ops)
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out, state.dims)


def tensor(*states) -> DensityMatrix:
    """Tensor product of density matrices (or pure states)."""
    mats = [_as_state(s) for s in states]
    out = mats[0].data
    dims = list(mats[0].dims)
    for m in mats[1:]:
        out = np.kron(out, m.data)
        dims.extend(m.dims)
    return DensityMatrix(out, dims, validate=False)


def choi_state(channel, dim: int | None = None) -> DensityMatrix:
    """``(I (x) channel)(|Psi+><Psi+|)`` with the reference system first."""
    ops = _kraus_list(channel)
    d = dim or ops[0].shape[1]
    psi = np.eye(d, dtype=complex).reshape(-1) / math.sqrt(d)
    proj = np.outer(psi, psi.conj()).reshape(d, d, d, d)
    d_out = ops[0].shape[0]
    out = np.zeros((d, d_out, d, d_out), dtype=complex)
    for k in ops:
        out += np.einsum("xa,iajb,yb->ixjy", k, proj, k.conj())
    return DensityMatrix(out.reshape(d * d_out, d * d_out), (d, d_out), validate=False)


_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


def bloch_vector(rho) -> np.ndarray:
    """Bloch vector ``(<X>, <Y>, <Z>)`` of a qubit state."""
    a = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    return np.real(np.einsum("kab,ba->k", _PAULI, a))


def from_bloch(r) -> DensityMatrix:
    r = np.asarray(r, dtype=float)
    return DensityMatrix(0.5 * (np.eye(2) + np.einsum("k,kab->ab", r, _PAULI)), (2,))
