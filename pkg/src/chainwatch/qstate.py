"""Quantum side: the joint pure state of Q and every detector ancilla.

Subsystems are labelled ``"Q"``, ``"X0"`` (the preparer A), ``"X1"``, ...,
``"Xm"``, in that order. Q is always written in the basis of the most recent
measurement, so every nonzero amplitude of a chain-built state has its Q
index equal to the last detector's index.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .chain import MeasurementChain
from .errors import DimensionCapExceeded, NotAPartition, UnknownLabel
from .numerics import (
    DEFAULT_TOLERANCES,
    Tolerances,
    clamp_eigenvalues,
    hermitian_eigenvalues,
    hermiticity_deviation,
)

DEFAULT_DIM_CAP = 2**20
DIM_CAP_ENV = "CHAINWATCH_DIM_CAP"


def dimension_cap() -> int:
    """Hilbert-dimension cap, overridable through ``CHAINWATCH_DIM_CAP``."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIM_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be a positive integer, got {raw!r}")
    return cap


def detector_label(k: int) -> str:
    return f"X{k}"


def chain_labels(n_steps: int) -> tuple[str, ...]:
    return ("Q",) + tuple(detector_label(k) for k in range(n_steps + 1))


@dataclass(frozen=True, eq=False)
class SparsePureState:
    """Pure state stored as ``{index tuple: amplitude}``.

    Index tuples list one basis index per subsystem, in ``labels`` order.
    Treat instances as immutable.
    """

    dims: tuple[int, ...]
    amplitudes: Mapping[tuple[int, ...], complex]
    labels: tuple[str, ...] = ()
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        labels = tuple(self.labels) or tuple(f"S{i}" for i in range(len(dims)))
        if len(labels) != len(dims):
            raise ValueError("one label per subsystem is required")
        if len(set(labels)) != len(labels):
            raise ValueError("subsystem labels must be unique")
        amps = {}
        for key, value in self.amplitudes.items():
            key = tuple(int(i) for i in key)
            if len(key) != len(dims) or any(not 0 <= i < d for i, d in zip(key, dims)):
                raise ValueError(f"index tuple {key} does not fit dims {dims}")
            if value != 0:
                amps[key] = complex(value)
        norm = sum(abs(a) ** 2 for a in amps.values())
        if abs(norm - 1.0) > self.tol.entropy_tol:
            raise ValueError(f"state has squared norm {norm!r}, expected 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_dense(cls, psi, labels: Sequence[str] = (), atol: float = 0.0) -> "SparsePureState":
        """Build from a dense tensor of shape ``dims``; entries ``<= atol`` are dropped."""
        psi = np.asarray(psi, dtype=np.complex128)
        amps = {
            idx: complex(psi[idx])
            for idx in zip(*np.nonzero(np.abs(psi) > atol))
        }
        return cls(psi.shape, amps, tuple(labels))

    @property
    def total_dimension(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def dense(self) -> np.ndarray:
        """Amplitudes as a dense tensor of shape ``dims`` (read-only)."""
        psi = np.zeros(self.dims, dtype=np.complex128)
        for key, value in self.amplitudes.items():
            psi[key] = value
        psi.setflags(write=False)
        return psi

    def amplitude(self, key: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(key), 0j)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(label) from None

    def phase_normalized(self) -> "SparsePureState":
        """Copy whose first nonzero amplitude (lexicographic order) is real positive."""
        if not self.amplitudes:
            return self
        first = self.amplitudes[min(self.amplitudes)]
        phase = first / abs(first)
        amps = {k: v / phase for k, v in self.amplitudes.items()}
        return SparsePureState(self.dims, amps, self.labels, self.tol)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    labels: tuple[str, ...]
    dims: tuple[int, ...]
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        dev = hermiticity_deviation(self.matrix)
        if dev > tol.psd_tol:
            raise ValueError(f"density matrix not Hermitian (deviation {dev:.3e})")
        tr = np.trace(self.matrix)
        if abs(tr - 1.0) > tol.psd_tol:
            raise ValueError(f"density matrix has trace {tr!r}")
        clamp_eigenvalues(hermitian_eigenvalues(self.matrix, tol), tol)


def von_neumann_unitary(n: int) -> np.ndarray:
    """``sum_i P_i (x) L_i`` on system (x) ancilla, ``L_i|k> = |k + i mod n>``.

    Row/column index of ``|s, a>`` is ``s * n + a``.
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    u = np.zeros((n * n, n * n), dtype=np.complex128)
    for s in range(n):
        for a in range(n):
            u[s * n + (a + s) % n, s * n + a] = 1.0
    return u


def _check_cap(total: int, dim_cap: int | None) -> None:
    cap = dimension_cap() if dim_cap is None else dim_cap
    if total > cap:
        raise DimensionCapExceeded(total, cap)


def build_joint_state(chain: MeasurementChain, dim_cap: int | None = None) -> SparsePureState:
    """Joint state of Q and all detectors from the amplitude product formula.

    The amplitude at ``(j_m, i, j_1, ..., j_m)`` is
    ``alpha_i * U1[i, j_1] * U2[j_1, j_2] * ... * Um[j_{m-1}, j_m]``.
    """
    n, m = chain.dimension, chain.n_steps
    _check_cap(n ** (m + 2), dim_cap)
    # grow the amplitude table one detector at a time, dropping dead branches
    paths: dict[tuple[int, ...], complex] = {
        (i,): complex(a) for i, a in enumerate(chain.preparation.amplitudes) if a != 0
    }
    for step in chain.steps:
        grown = {}
        for path, amp in paths.items():
            row = step.u[path[-1]]
            for j in range(n):
                if row[j] != 0:
                    grown[path + (j,)] = amp * row[j]
        paths = grown
    amps = {(path[-1],) + path: amp for path, amp in paths.items()}
    return SparsePureState((n,) * (m + 2), amps, chain_labels(m), chain.preparation.tol)


def _apply_two_body(psi: np.ndarray, op: np.ndarray, axis_a: int, axis_b: int) -> np.ndarray:
    n_a, n_b = psi.shape[axis_a], psi.shape[axis_b]
    moved = np.moveaxis(psi, (axis_a, axis_b), (0, 1))
    rest = moved.shape[2:]
    out = op @ moved.reshape(n_a * n_b, -1)
    return np.moveaxis(out.reshape((n_a, n_b) + rest), (0, 1), (axis_a, axis_b))


def build_joint_state_sequential(
    chain: MeasurementChain, dim_cap: int | None = None
) -> SparsePureState:
    """Joint state by applying the von Neumann unitary once per measurement.

    Q starts in the preparer's basis. Before each later measurement its
    coordinates are rewritten in the new basis (``d_j = sum_i c_i U_ij``),
    then a fresh ancilla in ``|0>`` is attached and entangled.
    """
    n, m = chain.dimension, chain.n_steps
    _check_cap(n ** (m + 2), dim_cap)
    vn = von_neumann_unitary(n)
    ancilla0 = np.zeros(n, dtype=np.complex128)
    ancilla0[0] = 1.0

    psi = np.asarray(chain.preparation.amplitudes, dtype=np.complex128)
    for k in range(m + 1):
        if k > 0:
            u = chain.steps[k - 1].u
            psi = np.tensordot(u.T, psi, axes=([1], [0]))
        psi = np.multiply.outer(psi, ancilla0)
        psi = _apply_two_body(psi, vn, 0, psi.ndim - 1)
    return SparsePureState.from_dense(psi, chain_labels(m), atol=0.0)


def partial_trace(state: SparsePureState, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix of the ``keep`` subsystems.

    The kept subsystems appear in the state's label order regardless of the
    order given in ``keep``.
    """
    keep = set(keep)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    axes = sorted(state.index_of(label) for label in keep)
    rest = [i for i in range(len(state.dims)) if i not in axes]
    kept_dims = tuple(state.dims[i] for i in axes)
    d_keep = int(np.prod(kept_dims))
    psi = np.transpose(state.dense, axes + rest).reshape(d_keep, -1)
    rho = psi @ psi.conj().T
    return DensityMatrix(tuple(state.labels[i] for i in axes), kept_dims, rho)


def von_neumann_entropy(rho: DensityMatrix | np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """``-Tr rho log2 rho`` from the clamped spectrum."""
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else rho
    eigs = clamp_eigenvalues(hermitian_eigenvalues(matrix, tol), tol)
    eigs = eigs[eigs > 0]
    h = float(-np.sum(eigs * np.log2(eigs)))
    return h if h > 0.0 else 0.0


def subsystem_entropy(state: SparsePureState, subset: Iterable[str]) -> float:
    return von_neumann_entropy(partial_trace(state, subset), state.tol)


def conditional_entropy(state: SparsePureState, target: Iterable[str], given: Iterable[str]) -> float:
    """``S(target | given) = S(target, given) - S(given)``."""
    target, given = set(target), set(given)
    return subsystem_entropy(state, target | given) - subsystem_entropy(state, given)


def mutual_information(state: SparsePureState, a: Iterable[str], b: Iterable[str]) -> float:
    """``I(a : b) = S(a) + S(b) - S(a, b)``."""
    a, b = set(a), set(b)
    return (
        subsystem_entropy(state, a)
        + subsystem_entropy(state, b)
        - subsystem_entropy(state, a | b)
    )


@dataclass(frozen=True)
class VennReport:
    """Atomic information regions of an entropy Venn diagram.

    ``region_values[T]`` is the value of the region lying inside exactly the
    parties in ``T``; ``subset_entropies[S]`` is the joint entropy of the
    parties in ``S``. Keys are frozensets of party names.
    """

    parties: tuple[str, ...]
    region_values: dict[frozenset, float]
    subset_entropies: dict[frozenset, float]

    @property
    def region_sum(self) -> float:
        return float(np.sum(list(self.region_values.values())))

    def entropy_from_regions(self, subset: Iterable[str]) -> float:
        """Rebuild ``S(subset)`` as the sum of regions it touches."""
        subset = frozenset(subset)
        return float(sum(v for t, v in self.region_values.items() if t & subset))

    def as_dict(self) -> dict:
        def key(s):
            return ",".join(p for p in self.parties if p in s)

        return {
            "parties": list(self.parties),
            "regions": {key(t): v for t, v in self.region_values.items()},
            "subset_entropies": {key(s): v for s, v in self.subset_entropies.items()},
            "region_sum": self.region_sum,
        }


def _normalize_parties(
    state: SparsePureState,
    parties: Mapping[str, Sequence[str]] | Sequence[str | Sequence[str]] | None,
) -> dict[str, tuple[str, ...]]:
    if parties is None:
        groups = {label: (label,) for label in state.labels}
    elif isinstance(parties, Mapping):
        groups = {name: tuple(labels) for name, labels in parties.items()}
    else:
        groups = {}
        for party in parties:
            members = (party,) if isinstance(party, str) else tuple(party)
            groups["+".join(members)] = members
    seen: list[str] = [label for members in groups.values() for label in members]
    for label in seen:
        if label not in state.labels:
            raise UnknownLabel(label)
    if any(not members for members in groups.values()):
        raise NotAPartition("every party needs at least one subsystem")
    if len(seen) != len(set(seen)) or set(seen) != set(state.labels):
        raise NotAPartition(
            f"parties {list(groups.values())} do not partition {list(state.labels)}"
        )
    return groups


def venn_report(
    state: SparsePureState,
    parties: Mapping[str, Sequence[str]] | Sequence[str | Sequence[str]] | None = None,
) -> VennReport:
    """Entropies of all party subsets and their atomic Venn regions.

    With ``G(U) = S(all) - S(all \\ U)`` the sum of regions contained in
    ``U``, Moebius inversion over the subset lattice gives
    ``region(T) = sum_{U <= T} (-1)^{|T|-|U|} G(U)``. Regions can be
    negative for entangled states.
    """
    groups = _normalize_parties(state, parties)
    names = tuple(groups)
    everything = frozenset(names)

    entropies: dict[frozenset, float] = {frozenset(): 0.0}
    for r in range(1, len(names) + 1):
        for combo in itertools.combinations(names, r):
            labels = [label for name in combo for label in groups[name]]
            entropies[frozenset(combo)] = subsystem_entropy(state, labels)

    total = entropies[everything]

    def inside(u: frozenset) -> float:
        return total - entropies[everything - u]

    regions = {}
    for r in range(1, len(names) + 1):
        for combo in itertools.combinations(names, r):
            t = frozenset(combo)
            value = 0.0
            for s in range(0, r + 1):
                for sub in itertools.combinations(combo, s):
                    value += (-1) ** (r - s) * (inside(frozenset(sub)) if sub else 0.0)
            regions[t] = value
    del entropies[frozenset()]
    return VennReport(names, regions, entropies)


def detector_entropies(state: SparsePureState, n_steps: int) -> list[float]:
    return [subsystem_entropy(state, [detector_label(k)]) for k in range(n_steps + 1)]

