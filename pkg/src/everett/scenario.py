"""Explicit matrices for the ensemble measurement model.

The full space is ordered ``F, O(1)..O(N), S(1)..S(N)`` with dimensions
``ν+2``, ``3`` and ``2``, row-major with ``F`` most significant.  Basis index
``i`` of each factor is the eigenvector with the ``i``-th eigenvalue:

* system ``S(p)``: ``α = (+1, -1)`` for outcomes 1, 2
* observer ``O(p)``: ``β = (0, 1, 2)``, index 0 being ignorance
* frequency meter ``F``: the :class:`~everett.freqmap.PhiGrid` values
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np

from everett import linalg
from everett.freqmap import PhiGrid, quantize_tilde

Completion = Literal["transposition", "cyclic"]
COMPLETIONS = ("transposition", "cyclic")

ALPHA = (1.0, -1.0)
BETA = (0.0, 1.0, 2.0)
SYSTEM_DIM = 2
OBSERVER_DIM = 3


@dataclass(frozen=True)
class FactorLayout:
    names: tuple[str, ...]
    dims: tuple[int, ...]

    @classmethod
    def for_ensemble(cls, n_systems: int, resolution: int) -> FactorLayout:
        names = ("F",) + tuple(f"O{p}" for p in range(1, n_systems + 1)) + tuple(
            f"S{p}" for p in range(1, n_systems + 1)
        )
        dims = (resolution + 2,) + (OBSERVER_DIM,) * n_systems + (SYSTEM_DIM,) * n_systems
        return cls(names, dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class GenericMeasurementSpec:
    """A single observer with ``L+1`` belief states measuring an ``M``-level system.

    ``belief_map[j-1]`` is the belief index (1..L) recorded for system
    eigenvalue ``j``.  ``beta_values[0]`` is the ignorance value.
    """

    system_dim: int
    belief_count: int
    belief_map: tuple[int, ...]
    gamma_values: tuple[float, ...]
    beta_values: tuple[float, ...]

    def __post_init__(self):
        m, l = self.system_dim, self.belief_count
        if m < 1 or l < 1 or l > m:
            raise ValueError(f"need 1 <= L <= M, got M={m}, L={l}")
        if len(self.belief_map) != m:
            raise ValueError("belief_map must assign a belief to every system eigenvalue")
        if set(self.belief_map) != set(range(1, l + 1)):
            raise ValueError("belief_map must be onto 1..L")
        if len(self.gamma_values) != m or len(set(self.gamma_values)) != m:
            raise ValueError("gamma_values must be M distinct values")
        if len(self.beta_values) != l + 1 or len(set(self.beta_values)) != l + 1:
            raise ValueError("beta_values must be L+1 distinct values")

    @classmethod
    def one_to_one(cls, m: int) -> GenericMeasurementSpec:
        return cls(m, m, tuple(range(1, m + 1)), tuple(float(j) for j in range(1, m + 1)),
                   tuple(float(i) for i in range(m + 1)))

    def system_projector(self, belief: int) -> np.ndarray:
        """Sum of system eigenprojectors recorded as ``belief``."""
        diag = [1.0 if b == belief else 0.0 for b in self.belief_map]
        return np.diag(diag).astype(np.complex128)


def build_copy_unitary_u(i: int, dim: int, completion: Completion = "transposition") -> np.ndarray:
    """Unitary on one observer-like factor sending the ignorance vector to vector ``i``.

    Only the image of basis vector 0 is physically fixed.  ``transposition``
    swaps 0 and ``i``; ``cyclic`` shifts every basis vector up by ``i``.  Both
    give the identity for ``i = 0``.
    """
    if not 0 <= i < dim:
        raise ValueError(f"index {i} outside 0..{dim - 1}")
    if completion == "transposition":
        perm = list(range(dim))
        perm[0], perm[i] = perm[i], perm[0]
    elif completion == "cyclic":
        perm = [(j + i) % dim for j in range(dim)]
    else:
        raise ValueError(f"unknown completion {completion!r}")
    u = np.zeros((dim, dim), dtype=np.complex128)
    for src, dst in enumerate(perm):
        u[dst, src] = 1.0
    return u


def build_generic_unitary(spec: GenericMeasurementSpec, completion: Completion = "transposition") -> np.ndarray:
    """``Σ_i u_i ⊗ P̃_i`` on observer ⊗ system, dimension ``(L+1)·M``."""
    odim = spec.belief_count + 1
    u = np.zeros((odim * spec.system_dim,) * 2, dtype=np.complex128)
    for i in range(1, spec.belief_count + 1):
        u += linalg.tensor_product(build_copy_unitary_u(i, odim, completion), spec.system_projector(i))
    return u


PAIR_SPEC = GenericMeasurementSpec(SYSTEM_DIM, 2, (1, 2), ALPHA, BETA)


def _amplitude_norm_ok(c1: complex, c2: complex) -> bool:
    return abs(abs(c1) ** 2 + abs(c2) ** 2 - 1.0) <= 1e-12


@dataclass(frozen=True)
class Structure:
    """The amplitude-independent part of a scenario; every operator depends only on this."""

    n_systems: int
    resolution: int
    completion: Completion = "transposition"

    def __post_init__(self):
        if self.n_systems < 1:
            raise ValueError("n_systems must be >= 1")
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")
        if self.completion not in COMPLETIONS:
            raise ValueError(f"unknown completion {self.completion!r}")

    @property
    def structure(self) -> Structure:
        return self

    @cached_property
    def layout(self) -> FactorLayout:
        return FactorLayout.for_ensemble(self.n_systems, self.resolution)

    @cached_property
    def grid(self) -> PhiGrid:
        return PhiGrid(self.resolution)

    def observer_factor(self, p: int) -> int:
        self._check_system(p)
        return p

    def system_factor(self, p: int) -> int:
        self._check_system(p)
        return self.n_systems + p

    @property
    def observer_factors(self) -> list[int]:
        return list(range(1, self.n_systems + 1))

    @property
    def system_factors(self) -> list[int]:
        return list(range(self.n_systems + 1, 2 * self.n_systems + 1))

    def _check_system(self, p: int) -> None:
        if not 1 <= p <= self.n_systems:
            raise IndexError(f"system index {p} outside 1..{self.n_systems}")


@dataclass(frozen=True)
class Scenario:
    """Ensemble size, meter resolution and the common system amplitudes.

    ``p1_exact`` optionally carries ``|c1|²`` as a ``Fraction`` for the exact
    weight paths; it must agree with ``c1`` to 1e-12.
    """

    n_systems: int
    resolution: int
    c1: complex
    c2: complex
    completion: Completion = "transposition"
    p1_exact: Fraction | None = None

    def __post_init__(self):
        Structure(self.n_systems, self.resolution, self.completion)
        if not _amplitude_norm_ok(self.c1, self.c2):
            raise ValueError(f"|c1|^2 + |c2|^2 must equal 1, got {abs(self.c1)**2 + abs(self.c2)**2!r}")
        if self.p1_exact is not None and abs(float(self.p1_exact) - abs(self.c1) ** 2) > 1e-12:
            raise ValueError("p1_exact disagrees with |c1|^2")

    @classmethod
    def from_p1(cls, n_systems: int, resolution: int, p1, phase1: float = 0.0, phase2: float = 0.0,
                completion: Completion = "transposition") -> Scenario:
        p1 = Fraction(p1)
        if not 0 <= p1 <= 1:
            raise ValueError(f"p1 must lie in [0, 1], got {p1}")
        c1 = math.sqrt(p1) * cmath.exp(1j * phase1)
        c2 = math.sqrt(1 - p1) * cmath.exp(1j * phase2)
        return cls(n_systems, resolution, complex(c1), complex(c2), completion, p1)

    @classmethod
    def random(cls, n_systems: int, resolution: int, rng: np.random.Generator,
               completion: Completion = "transposition") -> Scenario:
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z /= np.linalg.norm(z)
        return cls(n_systems, resolution, complex(z[0]), complex(z[1]), completion)

    def with_completion(self, completion: Completion) -> Scenario:
        return Scenario(self.n_systems, self.resolution, self.c1, self.c2, completion, self.p1_exact)

    @property
    def structure(self) -> Structure:
        return Structure(self.n_systems, self.resolution, self.completion)

    @property
    def layout(self) -> FactorLayout:
        return self.structure.layout

    @property
    def grid(self) -> PhiGrid:
        return self.structure.grid

    @property
    def p1(self) -> float:
        return abs(self.c1) ** 2

    @property
    def p2(self) -> float:
        return abs(self.c2) ** 2

    def observer_factor(self, p: int) -> int:
        return self.structure.observer_factor(p)

    def system_factor(self, p: int) -> int:
        return self.structure.system_factor(p)

    @property
    def observer_factors(self) -> list[int]:
        return self.structure.observer_factors

    @property
    def system_factors(self) -> list[int]:
        return self.structure.system_factors


def meter_diagonal(grid: PhiGrid) -> np.ndarray:
    return np.array([float(v) for v in grid.values], dtype=np.complex128)


def build_observable(which: str, scen: Scenario | Structure, p: int | None = None) -> np.ndarray:
    """Diagonal observable ``a(p)``, ``b(p)`` or ``f`` lifted to the full space."""
    return _observable(which, scen.structure, p)


@lru_cache(maxsize=64)
def _observable(which: str, scen: Structure, p: int | None) -> np.ndarray:
    dims = scen.layout.dims
    linalg.check_dim(scen.layout.total_dim)
    if which == "f":
        local, factor = np.diag(meter_diagonal(scen.grid)), 0
    elif which in ("a", "b"):
        if p is None:
            raise ValueError(f"observable {which!r} needs a system index")
        if which == "a":
            local, factor = np.diag(np.array(ALPHA, dtype=np.complex128)), scen.system_factor(p)
        else:
            local, factor = np.diag(np.array(BETA, dtype=np.complex128)), scen.observer_factor(p)
    else:
        raise ValueError(f"unknown observable {which!r}")
    return linalg.readonly(linalg.embed(local, [factor], dims))


def system_projector(i: int, p: int, scen: Scenario | Structure) -> np.ndarray:
    """``|S(p); α_i><S(p); α_i|`` on the full space."""
    if i not in (1, 2):
        raise ValueError(f"system outcome must be 1 or 2, got {i}")
    local = np.zeros((SYSTEM_DIM, SYSTEM_DIM), dtype=np.complex128)
    local[i - 1, i - 1] = 1.0
    return linalg.embed(local, [scen.system_factor(p)], scen.layout.dims)


def build_U_p(p: int, scen: Scenario | Structure) -> np.ndarray:
    """Measurement of ``S(p)`` by ``O(p)``; the two-factor generic unitary, embedded."""
    return _U_p(p, scen.structure)


@lru_cache(maxsize=64)
def _U_p(p: int, scen: Structure) -> np.ndarray:
    local = build_generic_unitary(PAIR_SPEC, scen.completion)
    factors = [scen.observer_factor(p), scen.system_factor(p)]
    return linalg.readonly(linalg.embed(local, factors, scen.layout.dims))


def build_U_O(scen: Scenario | Structure) -> np.ndarray:
    return _U_O(scen.structure)


@lru_cache(maxsize=32)
def _U_O(scen: Structure) -> np.ndarray:
    out = build_U_p(1, scen)
    for p in range(2, scen.n_systems + 1):
        out = linalg.compose(out, build_U_p(p, scen))
    return linalg.readonly(np.array(out))


def observer_strings(n: int) -> list[tuple[int, ...]]:
    """All belief strings in basis order of ``O(1) ⊗ ... ⊗ O(N)``."""
    return list(itertools.product(range(OBSERVER_DIM), repeat=n))


@lru_cache(maxsize=32)
def observer_bin_labels(n: int, resolution: int) -> tuple[int, ...]:
    grid = PhiGrid(resolution)
    return tuple(quantize_tilde(s, grid) for s in observer_strings(n))


def label_projector_O(k: int, scen: Scenario | Structure) -> np.ndarray:
    """Projector onto observer strings whose quantized frequency has label ``k``.

    Acts on ``O(1) ⊗ ... ⊗ O(N)`` only (dimension ``3^N``).
    """
    if not 0 <= k <= scen.resolution + 1:
        raise ValueError(f"label {k} outside 0..{scen.resolution + 1}")
    labels = observer_bin_labels(scen.n_systems, scen.resolution)
    return np.diag([1.0 if lab == k else 0.0 for lab in labels]).astype(np.complex128)


def label_projectors_O(scen: Scenario | Structure) -> list[np.ndarray]:
    return [label_projector_O(k, scen) for k in range(scen.resolution + 2)]


def build_U_F(scen: Scenario | Structure) -> np.ndarray:
    """Meter reading of all observers: ``Σ_k u_k^F ⊗ P̃_k`` on ``F ⊗ O...``, identity on systems."""
    return _U_F(scen.structure)


@lru_cache(maxsize=32)
def _U_F(scen: Structure) -> np.ndarray:
    fdim = scen.resolution + 2
    odim = OBSERVER_DIM ** scen.n_systems
    linalg.check_dim(scen.layout.total_dim)
    local = np.zeros((fdim * odim,) * 2, dtype=np.complex128)
    for k, proj in enumerate(label_projectors_O(scen)):
        local += linalg.tensor_product(build_copy_unitary_u(k, fdim, scen.completion), proj)
    factors = [0] + scen.observer_factors
    return linalg.readonly(linalg.embed(local, factors, scen.layout.dims))


def build_total_U(scen: Scenario | Structure) -> np.ndarray:
    return _total_U(scen.structure)


@lru_cache(maxsize=32)
def _total_U(scen: Structure) -> np.ndarray:
    return linalg.readonly(np.array(linalg.compose(build_U_F(scen), build_U_O(scen))))


def system_state(c1: complex, c2: complex) -> np.ndarray:
    return np.array([c1, c2], dtype=np.complex128)


@lru_cache(maxsize=32)
def build_initial_state(scen: Scenario) -> np.ndarray:
    """Ignorant meter and observers, every system in ``c1|α1> + c2|α2>``."""
    linalg.check_dim(scen.layout.total_dim)
    psi = linalg.basis_vector(scen.resolution + 2, 0)
    ignorant = linalg.basis_vector(OBSERVER_DIM, 0)
    for _ in range(scen.n_systems):
        psi = np.kron(psi, ignorant)
    s = system_state(scen.c1, scen.c2)
    for _ in range(scen.n_systems):
        psi = np.kron(psi, s)
    return linalg.readonly(psi)


def basis_index(scen: Scenario, f: int, observers: Sequence[int], systems: Sequence[int]) -> int:
    """Flat index of the product basis vector; system outcomes given as 1 or 2."""
    digits = [f, *observers, *(s - 1 for s in systems)]
    if len(digits) != len(scen.layout.dims):
        raise ValueError("wrong number of factor digits")
    idx = 0
    for d, dim in zip(digits, scen.layout.dims):
        if not 0 <= d < dim:
            raise ValueError(f"digit {d} outside 0..{dim - 1}")
        idx = idx * dim + d
    return idx
