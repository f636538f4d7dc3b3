"""Cross-checks between the classical closed forms and the quantum engine.

Each ``check_*`` function runs one acceptance criterion and returns a
:class:`CheckResult`; nothing here raises on a failed identity, so every
violation is counted and reported.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .chain import BasisChange, MeasurementChain, Preparation, detector_entropy, marginals, shannon_entropy
from .experiments import (
    AntiZenoConfig,
    SweepConfig,
    ZenoConfig,
    anti_zeno_expectation,
    figure3_sweep,
    zeno_closed_form,
    zeno_simulate,
)
from .numerics import random_unitary
from .qstate import (
    SparsePureState,
    build_joint_state,
    build_joint_state_sequential,
    detector_label,
    subsystem_entropy,
    venn_report,
)

IDENTITY_TOL = 1e-9
VENN_TOL = 1e-8
MONOTONE_TOL = 1e-12
ZENO_TOL = 1e-12
AMPLITUDE_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float = 0.0
    tolerance: float = 0.0
    detail: str = ""
    elapsed: float = 0.0
    violations: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: worst {self.worst:.3e} (tol {self.tolerance:.0e}), {self.elapsed:.2f}s"
        if self.detail:
            text += f"; {self.detail}"
        return text


def random_chain(rng: np.random.Generator, n: int, m: int) -> MeasurementChain:
    """Random unit preparation and ``m`` Haar-random basis changes."""
    prep = Preparation(random_unitary(n, rng)[:, 0])
    return MeasurementChain(prep, tuple(BasisChange(random_unitary(n, rng)) for _ in range(m)))


def chain_battery(count: int = 200, seed: int = 20070101, dims=(2, 3), max_steps: int = 4):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.choice(dims))
        m = int(rng.integers(0, max_steps + 1))
        out.append(random_chain(rng, n, m))
    return out


@dataclass
class _Tracker:
    tolerance: float
    worst: float = 0.0
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    def add(self, what: str, diff: float) -> None:
        self.checked += 1
        diff = abs(diff)
        if diff > self.worst or math.isnan(diff):
            self.worst = diff
        if not diff <= self.tolerance:
            self.violations.append(f"{what}: {diff:.3e}")

    def result(self, name: str, start: float, extra: str = "") -> CheckResult:
        detail = f"{len(self.violations)}/{self.checked} comparisons violated"
        if self.violations:
            detail += f" (first: {self.violations[0]})"
        if extra:
            detail += f"; {extra}"
        return CheckResult(
            name,
            not self.violations,
            self.worst,
            self.tolerance,
            detail,
            time.perf_counter() - start,
            list(self.violations),
        )


def _labels(ks) -> list[str]:
    return [detector_label(k) for k in ks]


def _states(chains):
    return [(c, build_joint_state(c)) for c in chains]


def _tag(i: int, chain: MeasurementChain) -> str:
    return f"chain {i} (N={chain.dimension}, m={chain.n_steps})"


def check_marginals(chains, time_limit: float = 30.0) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(IDENTITY_TOL)
    for i, (chain, state) in enumerate(_states(chains)):
        for k in chain.detectors:
            tr.add(f"{_tag(i, chain)} X{k}", subsystem_entropy(state, [detector_label(k)]) - detector_entropy(chain, k))
    res = tr.result("marginal entropies: quantum vs classical", start)
    if res.elapsed > time_limit:
        res.passed = False
        res.detail += f"; runtime {res.elapsed:.1f}s exceeds {time_limit:.0f}s"
    return res


def check_joint_entropy(chains) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(IDENTITY_TOL)
    for i, (chain, state) in enumerate(_states(chains)):
        m = chain.n_steps
        s_all = subsystem_entropy(state, _labels(range(m + 1)))
        s_last = subsystem_entropy(state, [detector_label(m)])
        s_q = subsystem_entropy(state, ["Q"])
        tr.add(f"{_tag(i, chain)} S(X0..Xm)-S(Xm)", s_all - s_last)
        tr.add(f"{_tag(i, chain)} S(Xm)-S(Q)", s_last - s_q)
    return tr.result("joint entropy of all detectors = S(Xm) = S(Q)", start)


def check_conditional(chains) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(IDENTITY_TOL)
    earlier_branch = 0
    for i, (chain, state) in enumerate(_states(chains)):
        h = [detector_entropy(chain, k) for k in chain.detectors]
        single = {k: subsystem_entropy(state, [detector_label(k)]) for k in chain.detectors}
        for j in chain.detectors:
            for k in chain.detectors:
                if j == k:
                    continue
                quantum = subsystem_entropy(state, _labels((j, k))) - single[k]
                expected = h[j] - h[k] if j > k else 0.0
                before = len(tr.violations)
                tr.add(f"{_tag(i, chain)} S(X{j}|X{k})", quantum - expected)
                if j < k and len(tr.violations) > before:
                    earlier_branch += 1
    return tr.result(
        "pairwise conditional entropies",
        start,
        f"{earlier_branch} violations in the earlier-given-later branch",
    )


def check_information(chains) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(IDENTITY_TOL)
    for i, (chain, state) in enumerate(_states(chains)):
        m = chain.n_steps
        h = [detector_entropy(chain, k) for k in chain.detectors]
        single = {k: subsystem_entropy(state, [detector_label(k)]) for k in chain.detectors}
        for n in chain.detectors:
            for k in range(n):
                info = single[n] + single[k] - subsystem_entropy(state, _labels((n, k)))
                tr.add(f"{_tag(i, chain)} I(X{n}:X{k})", info - h[k])
        if m >= 1:
            later = subsystem_entropy(state, _labels(range(1, m + 1)))
            info = later + single[0] - subsystem_entropy(state, _labels(range(m + 1)))
            tr.add(f"{_tag(i, chain)} I(X1..Xm:X0)", info - h[0])
    return tr.result("mutual informations with earlier detectors", start)


def check_markov(chains) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(IDENTITY_TOL)
    for i, (chain, state) in enumerate(_states(chains)):
        for k in range(1, chain.n_steps + 1):
            history = subsystem_entropy(state, _labels(range(k + 1))) - subsystem_entropy(state, _labels(range(k)))
            previous = subsystem_entropy(state, _labels((k - 1, k))) - subsystem_entropy(
                state, [detector_label(k - 1)]
            )
            tr.add(f"{_tag(i, chain)} X{k}", history - previous)
    return tr.result("Markov property of conditional entropies", start)


def check_venn_sum(chains, max_steps: int = 3) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(VENN_TOL)
    for i, chain in enumerate(chains):
        if chain.n_steps > max_steps:
            continue
        tr.add(_tag(i, chain), venn_report(build_joint_state(chain)).region_sum)
    return tr.result("Venn regions over all subsystems sum to zero", start)


def check_monotonicity(chains, convergence_steps: int = 50, theta: float = math.pi / 8) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(MONOTONE_TOL)
    for i, chain in enumerate(chains):
        h = [shannon_entropy(d) for d in marginals(chain)]
        for k in range(len(h) - 1):
            tr.add(f"{_tag(i, chain)} step {k}", min(0.0, h[k + 1] - h[k]))
    extras = []
    converged = True
    for p in (0.0, 0.1, 0.3, 1.0):
        h = [shannon_entropy(d) for d in marginals(MeasurementChain.qubit(p, [theta] * convergence_steps))]
        for k in range(len(h) - 1):
            tr.add(f"rotation chain p={p} step {k}", min(0.0, h[k + 1] - h[k]))
        gap = 1.0 - h[-1]
        extras.append(f"p={p}: 1-H(X{convergence_steps})={gap:.2e}")
        converged &= gap <= 0.05
    res = tr.result("detector entropy non-decreasing; converges to log2 N", start, ", ".join(extras))
    if not converged:
        res.passed = False
    return res


def check_zeno(max_n: int = 2048) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(ZENO_TOL)
    for p in (0.0, 0.25, 0.5, 1.0):
        for n in range(1, max_n + 1):
            res = zeno_simulate(ZenoConfig(n, p))
            tr.add(f"n={n}, p={p}", res.abs_diff)
    q1000 = zeno_closed_form(ZenoConfig(1000, 1.0))
    ok_value = abs(q1000 - 0.999383) <= 1e-6
    devs = [abs(zeno_closed_form(ZenoConfig(2**k, 1.0)) - 1.0) for k in range(12)]
    ok_monotone = all(b <= a for a, b in zip(devs, devs[1:]))
    res = tr.result("Zeno: simulated chain vs closed form", start, f"q(1000)={q1000:.6f}")
    if not (ok_value and ok_monotone):
        res.passed = False
        res.detail += "; value or doubling monotonicity check failed"
    return res


def check_anti_zeno(ns=(1, 2, 5, 10), trials: int = 100_000, seed: int = 7, time_limit: float = 10.0) -> CheckResult:
    start = time.perf_counter()
    parts = []
    worst = 0.0
    passed = True
    for n in ns:
        est = anti_zeno_expectation(AntiZenoConfig(n=n, trials=trials, seed=seed))
        worst = max(worst, est.sigmas)
        passed &= est.sigmas <= 5.0
        parts.append(f"n={n}: {est.sample_mean:.6f} vs {est.theory:.6f} ({est.sigmas:.2f} sigma)")
    elapsed = time.perf_counter() - start
    if elapsed > time_limit:
        passed = False
        parts.append(f"runtime {elapsed:.1f}s exceeds {time_limit:.0f}s")
    return CheckResult("anti-Zeno: Monte Carlo mean vs (2/pi)^n", passed, worst, 5.0, "; ".join(parts), elapsed)


def _binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])


def check_figure3(grid: int = 101, theta: float = math.pi / 8) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(IDENTITY_TOL)
    table = figure3_sweep(SweepConfig(theta, 2, grid))
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    for row in table.rows:
        p = float(row[0])
        q = p * c2 + (1 - p) * s2
        q2 = q * c2 + (1 - q) * s2
        for value, expected, name in zip(row[1:], (p, q, q2), ("A", "B", "C")):
            tr.add(f"p={p:.2f} H({name})", value - _binary_entropy(expected))
    at0 = table.rows[0, 1:]
    for got, want in zip(at0, (0.0, 0.600876, 0.811278)):
        tr.add("spot p=0", round(got - want, 6))
    mid = table.rows[np.argmin(np.abs(table.rows[:, 0] - 0.5)), 1:]
    for got in mid:
        tr.add("spot p=0.5", got - 1.0)
    return tr.result("qubit entropy sweep", start)


def _max_amplitude_gap(a: SparsePureState, b: SparsePureState) -> float:
    a, b = a.phase_normalized(), b.phase_normalized()
    keys = set(a.amplitudes) | set(b.amplitudes)
    return max(abs(a.amplitude(k) - b.amplitude(k)) for k in keys)


def check_construction(seed: int = 11, per_shape: int = 5) -> CheckResult:
    start = time.perf_counter()
    tr = _Tracker(AMPLITUDE_TOL)
    rng = np.random.default_rng(seed)
    for n in (2, 3):
        for m in range(4):
            for _ in range(per_shape):
                chain = random_chain(rng, n, m)
                gap = _max_amplitude_gap(build_joint_state(chain), build_joint_state_sequential(chain))
                tr.add(f"N={n}, m={m}", gap)
    return tr.result("amplitude formula vs sequential von Neumann unitaries", start)


def run_all(chain_count: int = 200, quick: bool = False) -> list[CheckResult]:
    chains = chain_battery(chain_count)
    return [
        check_marginals(chains),
        check_joint_entropy(chains),
        check_conditional(chains),
        check_information(chains),
        check_markov(chains),
        check_venn_sum(chains),
        check_monotonicity(chains),
        check_zeno(256 if quick else 2048),
        check_anti_zeno(trials=20_000 if quick else 100_000),
        check_figure3(),
        check_construction(),
    ]
