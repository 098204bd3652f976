"""Heisenberg-picture evolution and labeled (Everett-copy) decompositions."""
from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from everett import linalg
from everett.scenario import (
    BETA,
    OBSERVER_DIM,
    Scenario,
    Structure,
    build_copy_unitary_u,
    build_observable,
    build_total_U,
    build_U_F,
    label_projector_O,
    meter_diagonal,
    system_projector,
)

ZERO_WEIGHT_TOL = 1e-12
FAMILY_TOL = 1e-10


class LabelFamilyError(ValueError):
    """The label family is not a complete set of orthogonal projectors."""


def evolve(u, x) -> np.ndarray:
    """``U† X U``: the observable ``X`` after the unitary step ``U``."""
    u, x = linalg.as_matrix(u), linalg.as_matrix(x)
    return linalg.compose(linalg.compose(linalg.adjoint(u), x), u)


@dataclass
class CopyEntry:
    copy_id: int
    label_projector: np.ndarray = field(repr=False)
    copy_operator: np.ndarray = field(repr=False)
    weight: object
    exists: bool


@dataclass
class LabeledDecomposition:
    entries: list[CopyEntry]
    source: str = ""
    time_tag: str = "t1"

    @property
    def weights(self) -> list:
        return [e.weight for e in self.entries]

    @property
    def existing(self) -> list[int]:
        return [e.copy_id for e in self.entries if e.exists]


def _expectation(psi: np.ndarray, op: np.ndarray):
    val = np.conj(psi) @ (op @ psi)
    if psi.dtype == object or op.dtype == object:
        return val
    if abs(val.imag) > ZERO_WEIGHT_TOL:
        raise ValueError(f"label weight is not real: {val}")
    return float(val.real)


def decompose(x_t1, label_family: Sequence, initial_state, source: str = "",
              time_tag: str = "t1", tol: float = FAMILY_TOL) -> LabeledDecomposition:
    """Split ``x_t1`` over ``label_family`` and weigh each label in ``initial_state``.

    A copy exists when its weight is nonzero: above ``ZERO_WEIGHT_TOL`` for
    floating inputs, exactly nonzero for object (``Fraction``) inputs.  The
    recorded copy operator is ``X·P``, kept for inspection only.
    """
    x = linalg.as_matrix(x_t1)
    psi = linalg.as_vector(initial_state)
    family = [linalg.as_matrix(p) for p in label_family]
    if any(p.shape != x.shape for p in family) or psi.shape[0] != x.shape[0]:
        raise ValueError("label family, observable and state must share a dimension")
    orth, comp = linalg.family_deviation(family)
    if orth > tol or comp > tol:
        raise LabelFamilyError(f"label family deviates: orthogonality {orth:.3g}, completeness {comp:.3g}")
    exact = psi.dtype == object
    entries = []
    for cid, proj in enumerate(family):
        w = _expectation(psi, proj)
        exists = w != 0 if exact else abs(w) > ZERO_WEIGHT_TOL
        copy_op = linalg.compose_diagonal(x, proj) if linalg.is_diagonal(proj) else linalg.compose(x, proj)
        entries.append(CopyEntry(cid, proj, copy_op, w, bool(exists)))
    return LabeledDecomposition(entries, source, time_tag)


def observer_string_unitary(outcomes: Sequence[int], scen: Scenario) -> np.ndarray:
    """``⊗_p u_{i(p)}`` on ``O(1) ⊗ ... ⊗ O(N)``."""
    out = np.ones((1, 1), dtype=np.complex128)
    for i in outcomes:
        out = np.kron(out, build_copy_unitary_u(i, OBSERVER_DIM, scen.completion))
    return out


def system_string_projector(outcomes: Sequence[int]) -> np.ndarray:
    n = len(outcomes)
    diag = np.zeros(2 ** n)
    idx = 0
    for i in outcomes:
        idx = 2 * idx + (i - 1)
    diag[idx] = 1.0
    return np.diag(diag).astype(np.complex128)


def build_label_operator_L(k: int, scen: Scenario | Structure) -> np.ndarray:
    """Label operator of meter copy ``k``, assembled from its factors.

    ``L_k = Σ_s (⊗u_s)† P̃_k (⊗u_s) ⊗ P_s`` over system outcome strings ``s``,
    identity on the meter factor.  No evolved observable is used.
    """
    return _label_operator_L(k, scen.structure)


@lru_cache(maxsize=128)
def _label_operator_L(k: int, scen: Structure) -> np.ndarray:
    proj = label_projector_O(k, scen)
    n = scen.n_systems
    odim = OBSERVER_DIM ** n
    local = np.zeros((odim * 2 ** n,) * 2, dtype=np.complex128)
    for s in itertools.product((1, 2), repeat=n):
        us = observer_string_unitary(s, scen)
        local += np.kron(us.conj().T @ proj @ us, system_string_projector(s))
    factors = scen.observer_factors + scen.system_factors
    return linalg.readonly(linalg.embed(local, factors, scen.layout.dims))


def label_family_L(scen: Scenario) -> list[np.ndarray]:
    return [build_label_operator_L(k, scen) for k in range(scen.resolution + 2)]


def label_family_S(p: int, scen: Scenario) -> list[np.ndarray]:
    return [system_projector(i, p, scen) for i in (1, 2)]


def meter_copy_operators(scen: Scenario) -> list[np.ndarray]:
    """``f_k = u_k† f u_k`` on the meter factor alone."""
    f = np.diag(meter_diagonal(scen.grid))
    fdim = scen.resolution + 2
    out = []
    for k in range(fdim):
        u = build_copy_unitary_u(k, fdim, scen.completion)
        out.append(u.conj().T @ f @ u)
    return out


def observer_copy_operators(scen: Scenario) -> list[np.ndarray]:
    """``b_i = u_i† b u_i`` on one observer factor, for ``i = 1, 2``."""
    b = np.diag(np.array(BETA, dtype=np.complex128))
    out = []
    for i in (1, 2):
        u = build_copy_unitary_u(i, OBSERVER_DIM, scen.completion)
        out.append(u.conj().T @ b @ u)
    return out


def labeled_form_f(scen: Scenario) -> np.ndarray:
    """``Σ_k f_k ⊗ L_k`` assembled without any conjugation by the total unitary."""
    dims = scen.layout.dims
    total = np.zeros((scen.layout.total_dim,) * 2, dtype=np.complex128)
    for fk, lk in zip(meter_copy_operators(scen), label_family_L(scen)):
        total += linalg.compose(linalg.embed(fk, [0], dims), lk)
    return total


def labeled_form_b(p: int, scen: Scenario) -> np.ndarray:
    """``Σ_i b_i(p) ⊗ P_i^{S(p)}``."""
    dims = scen.layout.dims
    total = np.zeros((scen.layout.total_dim,) * 2, dtype=np.complex128)
    for bi, proj in zip(observer_copy_operators(scen), label_family_S(p, scen)):
        total += linalg.compose(linalg.embed(bi, [scen.observer_factor(p)], dims), proj)
    return total


@lru_cache(maxsize=64)
def evolved_observable(which: str, scen: Structure, p: int | None = None) -> np.ndarray:
    """``U† X U`` for a model observable under the constructed total unitary."""
    return linalg.readonly(evolve(build_total_U(scen), build_observable(which, scen, p)))


def intermediate_b(p: int, scen: Scenario) -> np.ndarray:
    """``U_F† b(p) U_F``; the meter reading leaves each observer untouched."""
    return evolve(build_U_F(scen), build_observable("b", scen, p))


def intermediate_f(scen: Scenario) -> np.ndarray:
    return evolve(build_U_F(scen), build_observable("f", scen))
