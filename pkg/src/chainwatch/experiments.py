"""Qubit experiments: the entropy sweep, the Zeno effect and the anti-Zeno effect.

All chains here use real relative rotations between consecutive bases. A
rotation by ``theta`` multiplies ``q - 1/2`` by ``cos(2 theta)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import BasisChange, MeasurementChain, Preparation, marginals, shannon_entropy

# trials per RNG block; trial t always draws from block t // ANTI_ZENO_BLOCK
ANTI_ZENO_BLOCK = 4096


@dataclass(frozen=True)
class ZenoConfig:
    n: int
    p: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    @property
    def step_angle(self) -> float:
        return math.pi / (4 * self.n)


@dataclass(frozen=True)
class AntiZenoConfig:
    n: int
    p: float = 1.0
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SweepConfig:
    theta: float = math.pi / 8
    steps: int = 2
    grid: int = 101

    def __post_init__(self):
        if self.grid < 2:
            raise ValueError("grid must be at least 2")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")


@dataclass(frozen=True)
class ZenoResult:
    config: ZenoConfig
    distributions: list[np.ndarray]
    entropies: list[float]
    q_closed_form: float

    @property
    def q_simulated(self) -> float:
        return float(self.distributions[-1][0])

    @property
    def abs_diff(self) -> float:
        return abs(self.q_simulated - self.q_closed_form)


@dataclass(frozen=True)
class AntiZenoTrial:
    angles: np.ndarray
    q_formula: float
    q_chain: float

    @property
    def q(self) -> float:
        return self.q_formula


@dataclass(frozen=True)
class AntiZenoEstimate:
    config: AntiZenoConfig
    sample_mean: float
    std_error: float
    variance: float
    theory: float

    @property
    def sigmas(self) -> float:
        if not self.std_error > 0:
            return 0.0 if self.sample_mean == self.theory else math.inf
        return abs(self.sample_mean - self.theory) / self.std_error

    @property
    def expected_q(self) -> float:
        """Sample estimate of ``E(q^(n)) = 1/2 + (p - 1/2) E(prod cos 2 theta_k)``."""
        return 0.5 + (self.config.p - 0.5) * self.sample_mean

    def as_dict(self) -> dict:
        return {
            "n": self.config.n,
            "p": self.config.p,
            "trials": self.config.trials,
            "seed": self.config.seed,
            "sample_mean": self.sample_mean,
            "std_error": self.std_error,
            "variance": self.variance,
            "theory": self.theory,
            "sigmas": self.sigmas,
            "expected_q": self.expected_q,
        }


@dataclass(frozen=True)
class SweepTable:
    headers: tuple[str, ...]
    rows: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.headers.index(name)]


def zeno_closed_form(cfg: ZenoConfig) -> float:
    return 0.5 + (cfg.p - 0.5) * math.cos(math.pi / (2 * cfg.n)) ** cfg.n


def zeno_chain(cfg: ZenoConfig) -> MeasurementChain:
    step = BasisChange.rotation(cfg.step_angle)
    return MeasurementChain(Preparation.qubit(cfg.p), (step,) * cfg.n)


def zeno_simulate(cfg: ZenoConfig) -> ZenoResult:
    """Run ``n`` detectors, each rotated by ``pi / 4n`` from the previous one."""
    dists = marginals(zeno_chain(cfg))
    return ZenoResult(cfg, dists, entropy_trajectory(dists), zeno_closed_form(cfg))


def entropy_trajectory(dists: Sequence[np.ndarray]) -> list[float]:
    """Shannon entropy (bits) of each distribution, vectorised over the trajectory."""
    p = np.asarray(dists, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return [float(h) if h > 0.0 else 0.0 for h in terms.sum(axis=1)]


def _draw_angles(rng: np.random.Generator, size) -> np.ndarray:
    return rng.uniform(0.0, math.pi / 4, size=size)


def anti_zeno_trial(n: int, p: float, rng=None, angles: Sequence[float] | None = None) -> AntiZenoTrial:
    """One random sequence of ``n`` relative angles, uniform on ``[0, pi/4]``.

    ``angles`` bypasses the draw (used to force degenerate sequences). The
    closed form ``1/2 + (p - 1/2) prod cos(2 theta_k)`` is returned alongside
    the first marginal entry of the equivalent chain.
    """
    if angles is None:
        angles = _draw_angles(np.random.default_rng(rng), n)
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (n,):
        raise ValueError(f"expected {n} angles, got shape {angles.shape}")
    q_formula = 0.5 + (p - 0.5) * float(np.prod(np.cos(2.0 * angles)))
    q_chain = float(marginals(MeasurementChain.qubit(p, angles))[-1][0])
    return AntiZenoTrial(angles, q_formula, q_chain)


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def anti_zeno_angles(seed: int, n: int, first: int, count: int) -> np.ndarray:
    """Angles for trials ``first .. first + count - 1`` as a ``(count, n)`` array.

    Trial ``t`` is row ``t % B`` of block ``t // B``, and each block has its
    own stream keyed by ``(seed, block)``, so a trial's angles do not depend
    on how the trials are split across workers.
    """
    out = np.empty((count, n))
    t = first
    while t < first + count:
        block, offset = divmod(t, ANTI_ZENO_BLOCK)
        take = min(ANTI_ZENO_BLOCK - offset, first + count - t)
        rows = _draw_angles(_block_generator(seed, block), (ANTI_ZENO_BLOCK, n))
        out[t - first : t - first + take] = rows[offset : offset + take]
        t += take
    return out


def _block_products(seed: int, n: int, block: int, trials: int) -> np.ndarray:
    first = block * ANTI_ZENO_BLOCK
    count = min(ANTI_ZENO_BLOCK, trials - first)
    return np.prod(np.cos(2.0 * anti_zeno_angles(seed, n, first, count)), axis=1)


def anti_zeno_products(cfg: AntiZenoConfig, threads: int = 1) -> np.ndarray:
    """``prod_k cos(2 theta_k)`` for every trial, in trial order."""
    n_blocks = -(-cfg.trials // ANTI_ZENO_BLOCK)
    blocks = range(n_blocks)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _block_products(cfg.seed, cfg.n, b, cfg.trials), blocks))
    else:
        parts = [_block_products(cfg.seed, cfg.n, b, cfg.trials) for b in blocks]
    return np.concatenate(parts)


def anti_zeno_expectation(cfg: AntiZenoConfig, threads: int = 1) -> AntiZenoEstimate:
    """Monte Carlo estimate of ``E(prod cos 2 theta_k)`` against ``(2/pi)^n``."""
    products = anti_zeno_products(cfg, threads)
    mean = math.fsum(products) / cfg.trials
    if cfg.trials > 1:
        variance = math.fsum((products - mean) ** 2) / (cfg.trials - 1)
        std_error = math.sqrt(variance / cfg.trials)
    else:
        variance = std_error = math.nan
    return AntiZenoEstimate(cfg, mean, std_error, variance, (2.0 / math.pi) ** cfg.n)


def figure3_sweep(cfg: SweepConfig) -> SweepTable:
    """Detector entropies ``H0..H_steps`` on a grid of qubit preparations ``p``."""
    grid = np.linspace(0.0, 1.0, cfg.grid)
    rows = np.empty((cfg.grid, cfg.steps + 2))
    for r, p in enumerate(grid):
        chain = MeasurementChain.qubit(float(p), [cfg.theta] * cfg.steps)
        rows[r, 0] = p
        rows[r, 1:] = [shannon_entropy(d) for d in marginals(chain)]
    headers = ("p",) + tuple(f"H{k}" for k in range(cfg.steps + 1))
    return SweepTable(headers, rows)
