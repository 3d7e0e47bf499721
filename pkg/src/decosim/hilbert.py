"""Dense complex linear algebra and quantum state containers.

Matrices are plain numpy ``complex128`` arrays throughout; the functions here
add the shape/domain validation and the structured operations (tensor
products, partial traces, hermitian eigenproblems, unitary propagators) the
rest of the toolkit builds on.  Storage is dense; the toolkit targets
Hilbert-space dimensions up to a few thousand.

States are validated on construction and rejected if invalid; nothing is
clamped or renormalized silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, StateError

# Construction-time tolerances for state and operator validation.
ATOL_HERMITIAN = 1e-10
ATOL_UNITARY = 1e-10
ATOL_NORM = 1e-10
ATOL_TRACE = 1e-10
# Eigenvalues of a density matrix may dip this far below zero before the
# state is rejected; small negatives are tolerated, never clipped.
EIG_FLOOR = -1e-8


def as_matrix(a, *, square: bool = False) -> np.ndarray:
    """Coerce *a* to a 2-D complex128 array, validating finiteness.

    Raises DimensionError for wrong rank or (if ``square``) non-square input,
    DomainError for non-finite entries.
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DomainError("matrix entries must be finite")
    return arr


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DomainError("vector entries must be finite")
    return arr


def matmul(a, b) -> np.ndarray:
    """Matrix product with explicit inner-dimension validation."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def kron(a, b) -> np.ndarray:
    """Tensor (Kronecker) product of two matrices."""
    return np.kron(as_matrix(a), as_matrix(b))


def is_hermitian(a, atol: float = ATOL_HERMITIAN) -> bool:
    a = as_matrix(a, square=True)
    return bool(np.max(np.abs(a - a.conj().T)) <= atol)


def is_unitary(u, atol: float = ATOL_UNITARY) -> bool:
    u = as_matrix(u, square=True)
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye)) <= atol)


@dataclass(frozen=True)
class TensorFactorization:
    """Factorization of a Hilbert space into an ordered tensor product.

    ``factor_dims`` lists the subsystem dimensions in tensor order; their
    product must equal the dimension of any matrix it is applied to (checked
    at the point of use).
    """

    factor_dims: tuple[int, ...]

    def __init__(self, factor_dims: Iterable[int]):
        dims = tuple(int(d) for d in factor_dims)
        if len(dims) == 0:
            raise DimensionError("factorization needs at least one factor")
        if any(d < 1 for d in dims):
            raise DimensionError(f"factor dimensions must be >= 1: {dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))


def partial_trace(rho, factorization, keep: Sequence[int]) -> np.ndarray:
    """Trace out all factors not listed in *keep*.

    *factorization* is a TensorFactorization (or a sequence of ints); *keep*
    holds factor indices to retain, in their original tensor order.  The
    result is the reduced matrix on the kept factors.
    """
    rho = as_matrix(rho, square=True)
    if not isinstance(factorization, TensorFactorization):
        factorization = TensorFactorization(factorization)
    dims = factorization.factor_dims
    n = len(dims)
    if factorization.total_dim != rho.shape[0]:
        raise DimensionError(
            f"factorization {dims} does not match matrix dimension "
            f"{rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    if len(keep) == 0:
        raise DimensionError("must keep at least one factor")

    # Row and column multi-indices share a letter on traced factors.
    reshaped = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise DimensionError("too many tensor factors")
    row = []
    col = []
    out = []
    next_free = 0
    for i in range(n):
        if i in keep:
            row.append(letters[next_free])
            col.append(letters[next_free + 1])
            out.append((letters[next_free], letters[next_free + 1]))
            next_free += 2
        else:
            row.append(letters[next_free])
            col.append(letters[next_free])
            next_free += 1
    subscript = "".join(row) + "".join(col) + "->" + \
        "".join(p[0] for p in out) + "".join(p[1] for p in out)
    reduced = np.einsum(subscript, reshaped)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d_keep, d_keep)


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns).  Rejects input
    whose hermiticity defect exceeds ATOL_HERMITIAN.
    """
    a = as_matrix(a, square=True)
    if not is_hermitian(a):
        raise DomainError("matrix is not hermitian within 1e-10")
    w, v = np.linalg.eigh(a)
    return w, v


def expm_hermitian_prop(h, t: float) -> np.ndarray:
    """Unitary propagator exp(-i h t) for hermitian h, via the spectral
    decomposition.  The result is unitary to machine precision."""
    w, v = eig_hermitian(h)
    phases = np.exp(-1j * w * float(t))
    return (v * phases) @ v.conj().T


class QuantumState:
    """A validated pure or mixed state.

    Construct through :meth:`pure` (state vector, unit norm within 1e-10) or
    :meth:`mixed` (density matrix: hermitian within 1e-10, unit trace within
    1e-10, eigenvalues >= -1e-8).  Invalid data raises StateError; the input
    is never repaired.

    Attributes
    ----------
    kind : str
        ``"pure"`` or ``"mixed"``.
    data : np.ndarray
        The state vector (pure) or density matrix (mixed).
    dim : int
        Hilbert-space dimension.
    """

    __slots__ = ("kind", "data", "dim")

    _TOKEN = object()

    def __init__(self, token, kind: str, data: np.ndarray):
        if token is not QuantumState._TOKEN:
            raise TypeError("use QuantumState.pure or QuantumState.mixed")
        self.kind = kind
        self.data = data
        self.dim = data.shape[0]

    @classmethod
    def pure(cls, vector) -> "QuantumState":
        v = as_vector(vector)
        if v.shape[0] < 2:
            raise StateError("state dimension must be at least 2")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > ATOL_NORM:
            raise StateError(
                f"pure state norm {norm:.17g} deviates from 1 beyond 1e-10")
        return cls(cls._TOKEN, "pure", v.copy())

    @classmethod
    def mixed(cls, matrix) -> "QuantumState":
        m = as_matrix(matrix, square=True)
        if m.shape[0] < 2:
            raise StateError("state dimension must be at least 2")
        if np.max(np.abs(m - m.conj().T)) > ATOL_HERMITIAN:
            raise StateError("density matrix not hermitian within 1e-10")
        tr = m.trace()
        if abs(tr - 1.0) > ATOL_TRACE:
            raise StateError(
                f"density matrix trace {tr.real:.17g} deviates from 1 "
                "beyond 1e-10")
        w = np.linalg.eigvalsh(m)
        if w[0] < EIG_FLOOR:
            raise StateError(
                f"density matrix has eigenvalue {w[0]:.3e} below -1e-8")
        return cls(cls._TOKEN, "mixed", m.copy())

    def density_matrix(self) -> np.ndarray:
        """Density-matrix form: the outer product for pure states, the
        stored matrix for mixed ones."""
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return self.data.copy()

    def __repr__(self) -> str:
        return f"QuantumState(kind={self.kind!r}, dim={self.dim})"
