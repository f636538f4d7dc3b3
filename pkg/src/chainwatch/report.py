"""Chain config files and the self-validating run report."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .chain import (
    BasisChange,
    MeasurementChain,
    Preparation,
    conditional_entropy_closed_form,
    joint_entropy_closed_form,
    marginals,
    mutual_information_closed_form,
    shannon_entropy,
)
from .errors import ChainwatchError, ConfigError
from .numerics import DEFAULT_TOLERANCES, Tolerances, check_unitary
from .qstate import build_joint_state, detector_label, subsystem_entropy, venn_report


def _complex_vector(raw, what: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected [re, im] pairs") from exc
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ConfigError(f"{what}: expected [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def chain_from_config(data: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> MeasurementChain:
    """Build a chain from a parsed config.

    Two layouts are accepted, and exactly one must be present:

    * explicit: ``{"amplitudes": [[re, im], ...], "unitaries": [[[[re, im], ...], ...], ...]}``
    * qubit shorthand: ``{"p": 0.3, "angles": [0.39, ...]}`` (radians)
    """
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    explicit = "amplitudes" in data or "unitaries" in data
    shorthand = "p" in data or "angles" in data
    if explicit == shorthand:
        raise ConfigError("config needs exactly one of {amplitudes, unitaries} or {p, angles}")
    try:
        if shorthand:
            p = data.get("p")
            angles = data.get("angles", [])
            if not isinstance(p, (int, float)) or isinstance(p, bool):
                raise ConfigError("p must be a number")
            if not isinstance(angles, list) or not all(
                isinstance(a, (int, float)) and not isinstance(a, bool) for a in angles
            ):
                raise ConfigError("angles must be a list of numbers")
            return MeasurementChain.qubit(float(p), [float(a) for a in angles])

        amps = _complex_vector(data.get("amplitudes"), "amplitudes")
        if amps.ndim != 1:
            raise ConfigError("amplitudes must be a flat list of [re, im] pairs")
        steps = []
        for k, raw in enumerate(data.get("unitaries", []), start=1):
            u = _complex_vector(raw, f"unitary {k}")
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise ConfigError(f"unitary {k} must be square, got shape {u.shape}")
            verdict = check_unitary(u, tol)
            if not verdict.passed:
                raise ConfigError(
                    f"unitary {k} fails the unitarity check (deviation {verdict.deviation:.3e})"
                )
            steps.append(BasisChange(u, tol))
        return MeasurementChain(Preparation(amps, tol), tuple(steps))
    except ConfigError:
        raise
    except (ChainwatchError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_chain_config(path: str | Path, tol: Tolerances = DEFAULT_TOLERANCES) -> MeasurementChain:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return chain_from_config(data, tol)


def chain_to_config(chain: MeasurementChain) -> dict:
    """Explicit-layout config for ``chain``."""
    pair = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
    return {
        "amplitudes": [pair(a) for a in chain.preparation.amplitudes],
        "unitaries": [[[pair(z) for z in row] for row in step.u] for step in chain.steps],
    }


@dataclass
class Comparison:
    quantity: str
    closed_form: float
    oracle: float | None = None

    @property
    def abs_diff(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(self.closed_form - self.oracle)

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "closed_form": self.closed_form,
            "oracle": self.oracle,
            "abs_diff": self.abs_diff,
        }


@dataclass
class RunReport:
    dimension: int
    steps: int
    marginals: list[list[float]]
    comparisons: list[Comparison]
    venn: dict | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def entropies(self) -> list[float]:
        return [c.closed_form for c in self.comparisons[: self.steps + 1]]

    @property
    def max_abs_diff(self) -> float | None:
        diffs = [c.abs_diff for c in self.comparisons if c.abs_diff is not None]
        return max(diffs) if diffs else None

    def worst(self) -> Comparison | None:
        checked = [c for c in self.comparisons if c.abs_diff is not None]
        return max(checked, key=lambda c: c.abs_diff) if checked else None

    def as_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "dimension": self.dimension,
            "steps": self.steps,
            "marginals": self.marginals,
            "comparisons": [c.as_dict() for c in self.comparisons],
            "max_abs_diff": self.max_abs_diff,
            "venn": self.venn,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(
            dimension=data["dimension"],
            steps=data["steps"],
            marginals=data["marginals"],
            comparisons=[
                Comparison(c["quantity"], c["closed_form"], c["oracle"])
                for c in data["comparisons"]
            ],
            venn=data.get("venn"),
            metadata=data.get("metadata", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["quantity", "closed_form", "oracle", "abs_diff"])
        for k, dist in enumerate(self.marginals):
            for i, prob in enumerate(dist):
                writer.writerow([f"P({detector_label(k)}={i})", fmt(prob), "", ""])
        for c in self.comparisons:
            writer.writerow([c.quantity, fmt(c.closed_form), fmt(c.oracle), fmt(c.abs_diff)])
        if self.venn is not None:
            for region, value in self.venn["regions"].items():
                writer.writerow([f"region({region})", fmt(value), "", ""])
        return buf.getvalue()


def fmt(x: float | None) -> str:
    """Shortest string that round-trips to the same double."""
    if x is None:
        return ""
    return repr(float(x))


def _span(ks) -> str:
    ks = list(ks)
    if len(ks) == 1:
        return detector_label(ks[0])
    return f"{detector_label(ks[0])}..{detector_label(ks[-1])}"


def build_run_report(
    chain: MeasurementChain,
    oracle: bool = True,
    venn: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
    reproducible: bool = False,
    dim_cap: int | None = None,
) -> RunReport:
    """Evaluate every closed-form quantity and, with ``oracle``, its quantum value."""
    m = chain.n_steps
    dists = marginals(chain)
    h = [shannon_entropy(d) for d in dists]
    state = build_joint_state(chain, dim_cap) if (oracle or venn) else None

    def s(ks) -> float | None:
        if state is None:
            return None
        return subsystem_entropy(state, [detector_label(k) for k in ks])

    def diff(a, b):
        return None if a is None or b is None else a - b

    comps: list[Comparison] = []
    for k in range(m + 1):
        comps.append(Comparison(f"H({detector_label(k)})", h[k], s([k])))
    everything = list(range(m + 1))
    comps.append(
        Comparison(f"H({_span(everything)})", joint_entropy_closed_form(chain, everything), s(everything))
    )
    comps.append(
        Comparison("H(Q)", h[m], None if state is None else subsystem_entropy(state, ["Q"]))
    )
    for j in range(m + 1):
        for k in range(m + 1):
            if j == k:
                continue
            comps.append(
                Comparison(
                    f"H({detector_label(j)}|{detector_label(k)})",
                    conditional_entropy_closed_form(chain, j, k),
                    diff(s([j, k]), s([k])),
                )
            )
    for n in range(m + 1):
        for k in range(n):
            pair = s([n, k])
            comps.append(
                Comparison(
                    f"I({detector_label(n)}:{detector_label(k)})",
                    mutual_information_closed_form(chain, n, k),
                    None if pair is None else s([n]) + s([k]) - pair,
                )
            )
    if m >= 1:
        later = list(range(1, m + 1))
        info = None if state is None else s(later) + s([0]) - s(everything)
        comps.append(Comparison(f"I({_span(later)}:X0)", h[0], info))
    for i in range(1, m + 1):
        comps.append(
            Comparison(
                f"H({detector_label(i)}|{_span(range(i))})",
                h[i] - h[i - 1],
                diff(s(range(i + 1)), s(range(i))),
            )
        )

    metadata: dict[str, Any] = {
        "version": __version__,
        "seed": None,
        "tolerances": tol.as_dict(),
        "oracle": oracle,
    }
    if not reproducible:
        metadata["timestamp"] = datetime.now(timezone.utc).isoformat()

    return RunReport(
        dimension=chain.dimension,
        steps=m,
        marginals=[[float(x) for x in d] for d in dists],
        comparisons=comps,
        venn=venn_report(state).as_dict() if venn else None,
        metadata=metadata,
    )


def check_report(report: RunReport, tol: Tolerances = DEFAULT_TOLERANCES) -> Comparison | None:
    """Return the worst comparison if it exceeds ``entropy_tol``, else ``None``."""
    worst = report.worst()
    if worst is not None and (math.isnan(worst.abs_diff) or worst.abs_diff > tol.entropy_tol):
        return worst
    return None
