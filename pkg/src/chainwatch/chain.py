"""Classical side of a consecutive-measurement chain.

Every quantity here is computed from the transition probabilities
``q[j|i] = |U_ij|^2`` alone, without ever constructing the joint quantum
state. Detector index 0 is the preparer A; index ``k >= 1`` is the detector
that measured after the ``k``-th basis change.

Distributions and transition matrices are plain float arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptySubset,
    IndexOutOfRange,
    InvalidDistribution,
    NotUnitary,
    OrderViolation,
    SameIndex,
)
from .numerics import DEFAULT_TOLERANCES, Tolerances, as_matrix, check_unitary, rotation


@dataclass(frozen=True, eq=False)
class Preparation:
    """State ``|Q> = sum_i alpha_i |a_i>`` written in the preparer's basis."""

    amplitudes: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size < 2:
            raise InvalidDistribution("a preparation needs at least two basis states")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > self.tol.entropy_tol:
            raise InvalidDistribution(f"amplitudes have squared norm {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_probabilities(cls, probabilities: Sequence[float]) -> "Preparation":
        """Real non-negative amplitudes ``sqrt(p_i)``."""
        p = np.asarray(probabilities, dtype=np.float64)
        if np.any(p < 0):
            raise InvalidDistribution("probabilities must be non-negative")
        return cls(np.sqrt(p))

    @classmethod
    def qubit(cls, p: float) -> "Preparation":
        if not 0.0 <= p <= 1.0:
            raise InvalidDistribution(f"p must lie in [0, 1], got {p!r}")
        return cls.from_probabilities([p, 1.0 - p])

    @property
    def dimension(self) -> int:
        return self.amplitudes.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class BasisChange:
    """Overlap matrix ``U_ij = <b_j|a_i>`` between consecutive bases.

    Rows index the previous basis, columns the new one.
    """

    u: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        u = as_matrix(self.u).copy()
        verdict = check_unitary(u, self.tol)
        if not verdict.passed:
            raise NotUnitary(
                f"basis change is not unitary (deviation {verdict.deviation:.3e}, "
                f"row deviation {verdict.row_deviation:.3e})"
            )
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def rotation(cls, theta: float) -> "BasisChange":
        return cls(rotation(theta))

    @property
    def dimension(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementChain:
    preparation: Preparation
    steps: tuple[BasisChange, ...] = ()

    def __post_init__(self):
        steps = tuple(self.steps)
        n = self.preparation.dimension
        for k, step in enumerate(steps, start=1):
            if step.dimension != n:
                raise ValueError(
                    f"step {k} has dimension {step.dimension}, preparation has {n}"
                )
        object.__setattr__(self, "steps", steps)

    @classmethod
    def qubit(cls, p: float, angles: Iterable[float]) -> "MeasurementChain":
        """Qubit chain with real relative rotations between consecutive bases."""
        return cls(Preparation.qubit(p), tuple(BasisChange.rotation(t) for t in angles))

    @property
    def dimension(self) -> int:
        return self.preparation.dimension

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def detectors(self) -> range:
        return range(self.n_steps + 1)


def _check_index(chain: MeasurementChain, k: int) -> None:
    if not 0 <= k <= chain.n_steps:
        raise IndexOutOfRange(f"detector index {k} outside 0..{chain.n_steps}")


def transition_of(step: BasisChange) -> np.ndarray:
    """Transition matrix ``t[i, j] = q[j|i] = |U_ij|^2`` (doubly stochastic)."""
    return np.abs(step.u) ** 2


def marginal_after(chain: MeasurementChain, k: int) -> np.ndarray:
    """Outcome distribution of detector ``k`` (``k = 0`` is the preparer)."""
    _check_index(chain, k)
    dist = chain.preparation.probabilities
    for step in chain.steps[:k]:
        dist = dist @ transition_of(step)
    return dist


def marginals(chain: MeasurementChain) -> list[np.ndarray]:
    """All detector marginals, one matrix-vector product per step."""
    dist = chain.preparation.probabilities
    out = [dist]
    cache: dict[int, np.ndarray] = {}
    for step in chain.steps:
        t = cache.get(id(step))
        if t is None:
            t = cache[id(step)] = transition_of(step)
        dist = dist @ t
        out.append(dist)
    return out


def shannon_entropy(d) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = np.asarray(d, dtype=np.float64).reshape(-1)
    if np.any(p < -DEFAULT_TOLERANCES.entropy_tol):
        raise InvalidDistribution("distribution has negative entries")
    if abs(p.sum() - 1.0) > DEFAULT_TOLERANCES.entropy_tol:
        raise InvalidDistribution(f"distribution sums to {p.sum()!r}")
    p = p[p > 0]
    h = float(-np.sum(p * np.log2(p)))
    # -0.0 and rounding below zero both read as zero
    return h if h > 0.0 else 0.0


def detector_entropy(chain: MeasurementChain, k: int) -> float:
    return shannon_entropy(marginal_after(chain, k))


def joint_entropy_closed_form(chain: MeasurementChain, subset: Iterable[int]) -> float:
    """Joint entropy of a set of detectors: the entropy of its latest member."""
    subset = list(subset)
    if not subset:
        raise EmptySubset("joint entropy needs at least one detector")
    for k in subset:
        _check_index(chain, k)
    return detector_entropy(chain, max(subset))


def conditional_entropy_closed_form(chain: MeasurementChain, j: int, k: int) -> float:
    """``H(X_j | X_k)``: ``H(X_j) - H(X_k)`` when ``j`` comes after ``k``, else 0."""
    if j == k:
        raise SameIndex(f"conditional entropy of detector {j} on itself")
    _check_index(chain, j)
    _check_index(chain, k)
    if j > k:
        return detector_entropy(chain, j) - detector_entropy(chain, k)
    return 0.0


def mutual_information_closed_form(chain: MeasurementChain, n: int, k: int) -> float:
    """``I(X_n : X_k) = H(X_k)`` for a later detector ``n > k``."""
    if n <= k:
        raise OrderViolation(f"need n > k, got n={n}, k={k}")
    _check_index(chain, n)
    _check_index(chain, k)
    return detector_entropy(chain, k)


def outcome_chain_probability(chain: MeasurementChain, outcomes: Sequence[int]) -> float:
    """Probability of the full outcome history ``(i, j_1, ..., j_m)``.

    ``p_i * q[j_1|i] * q[j_2|j_1] * ... * q[j_m|j_{m-1}]``.
    """
    outcomes = list(outcomes)
    if len(outcomes) != chain.n_steps + 1:
        raise IndexOutOfRange(
            f"expected {chain.n_steps + 1} outcomes, got {len(outcomes)}"
        )
    n = chain.dimension
    if any(not 0 <= o < n for o in outcomes):
        raise IndexOutOfRange(f"outcome indices must lie in 0..{n - 1}")
    prob = float(chain.preparation.probabilities[outcomes[0]])
    for step, prev, cur in zip(chain.steps, outcomes, outcomes[1:]):
        prob *= float(abs(step.u[prev, cur]) ** 2)
    return prob
