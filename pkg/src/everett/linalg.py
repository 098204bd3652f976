"""Dense complex matrices for full-tensor simulation at small ensemble sizes.

Operators and states are plain numpy arrays (``complex128``).  Object arrays
holding ``Fraction`` entries pass through the same functions, which is how the
exact-arithmetic paths reuse them.
"""
from __future__ import annotations

import os
from collections.abc import Sequence

import numpy as np

DEFAULT_MAX_DIM = 4096


class DimensionLimitError(ValueError):
    """Raised when a matrix would exceed the configured dense-dimension cap."""


def max_dim() -> int:
    """Current cap on matrix dimension; ``EW_MAX_DIM`` overrides the default."""
    raw = os.environ.get("EW_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    value = int(raw)
    if value < 1:
        raise ValueError(f"EW_MAX_DIM must be positive, got {raw!r}")
    return value


def check_dim(dim: int, limit: int | None = None) -> int:
    limit = max_dim() if limit is None else limit
    if dim > limit:
        raise DimensionLimitError(f"dimension {dim} exceeds cap {limit}")
    return dim


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if a.dtype != object:
        a = a.astype(np.complex128, copy=False)
    return a


def as_vector(v) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError(f"expected a non-empty vector, got shape {v.shape}")
    if v.dtype != object:
        v = v.astype(np.complex128, copy=False)
    return v


def readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def identity(dim: int) -> np.ndarray:
    return np.eye(check_dim(dim), dtype=np.complex128)


def basis_vector(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v


def tensor_product(a, b, limit: int | None = None) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with ``a`` as the more significant factor."""
    a, b = as_matrix(a), as_matrix(b)
    check_dim(a.shape[0] * b.shape[0], limit)
    return np.kron(a, b)


def tensor_all(mats: Sequence, limit: int | None = None) -> np.ndarray:
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = tensor_product(out, m, limit)
    return out


def adjoint(a) -> np.ndarray:
    a = as_matrix(a)
    return np.conj(a).T


def _is_real(a: np.ndarray) -> bool:
    return a.dtype != object and not a.imag.any()


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b``, using a real product when both imaginary parts vanish."""
    if _is_real(a) and _is_real(b):
        return (np.ascontiguousarray(a.real) @ np.ascontiguousarray(b.real)).astype(np.complex128)
    return a @ b


def compose(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return matmul(a, b)


def compose_diagonal(a, d) -> np.ndarray:
    """``a @ d`` for diagonal ``d``, by scaling the columns of ``a``."""
    a, d = as_matrix(a), as_matrix(d)
    if a.shape != d.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {d.shape[0]}")
    return a * np.diagonal(d)[None, :]


def max_norm(a) -> float:
    """Largest absolute entry; 0.0 for an empty array."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a.astype(np.complex128))))


def _eye_like(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if a.dtype == object:
        return np.eye(n, dtype=int).astype(object)
    return np.eye(n, dtype=np.complex128)


def is_unitary(a, tol: float) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = as_matrix(a)
    return unitarity_deviation(a) <= tol


def unitarity_deviation(a) -> float:
    """Max-norm of ``a a† - I`` and ``a† a - I``, whichever is larger."""
    a = as_matrix(a)
    ah = adjoint(a)
    eye = _eye_like(a)
    return max(max_norm(matmul(a, ah) - eye), max_norm(matmul(ah, a) - eye))


def is_projector(a, tol: float) -> bool:
    """Hermitian and idempotent, both within ``tol`` in the max-norm."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a = as_matrix(a)
    return max_norm(a - adjoint(a)) <= tol and max_norm(matmul(a, a) - a) <= tol


def is_diagonal(a: np.ndarray) -> bool:
    off = a.copy()
    np.fill_diagonal(off, 0)
    return not off.any()


def family_deviation(family: Sequence) -> tuple[float, float]:
    """Return ``(orthogonality, completeness)`` max-norm deviations of a family.

    Orthogonality compares ``P_k P_l`` with ``δ_kl P_k`` over all ordered
    pairs; completeness compares ``Σ_k P_k`` with the identity.
    """
    mats = [as_matrix(p) for p in family]
    if all(is_diagonal(m) for m in mats):
        diags = [np.diagonal(m) for m in mats]
        orth = 0.0
        for k, dk in enumerate(diags):
            for l, dl in enumerate(diags):
                target = dk if k == l else 0
                orth = max(orth, max_norm(dk * dl - target))
        return orth, max_norm(sum(diags[1:], diags[0].copy()) - 1)
    orth = 0.0
    for k, pk in enumerate(mats):
        for l, pl in enumerate(mats):
            target = pk if k == l else 0
            orth = max(orth, max_norm(matmul(pk, pl) - target))
    total = sum(mats[1:], mats[0].copy())
    return orth, max_norm(total - _eye_like(mats[0]))


def embed(op, factors: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Lift ``op`` acting on ``factors`` (in that order) to the full product space.

    ``dims`` lists every factor dimension in layout order; the identity acts on
    the factors not named.  Row-major mixed-radix indexing, first factor most
    significant.
    """
    op = as_matrix(op)
    dims = list(dims)
    factors = list(factors)
    if len(set(factors)) != len(factors):
        raise ValueError("repeated factor index")
    sub = int(np.prod([dims[f] for f in factors]))
    if op.shape[0] != sub:
        raise ValueError(f"operator dim {op.shape[0]} does not match factors {factors}")
    total = check_dim(int(np.prod(dims)))
    rest = [i for i in range(len(dims)) if i not in factors]
    order = factors + rest
    rest_dim = int(np.prod([dims[r] for r in rest])) if rest else 1
    if op.dtype == object:
        full = np.kron(op, np.eye(rest_dim, dtype=int).astype(object))
    else:
        full = np.kron(op, np.eye(rest_dim, dtype=np.complex128))
    n = len(dims)
    t = full.reshape([dims[i] for i in order] * 2)
    inv = [order.index(i) for i in range(n)]
    t = t.transpose(inv + [n + j for j in inv])
    return np.ascontiguousarray(t.reshape(total, total))
