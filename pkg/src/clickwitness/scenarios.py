"""Scenario configs for sweeps and the frozen figure-reproduction presets.

A scenario bundles a state family, a detector configuration, an index-set
selection, a sweep grid over the total input intensity |alpha|^2, and the
output destination.  JSON scenario files are parsed strictly: unknown keys
anywhere are rejected so typos in physics parameters cannot pass silently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .detectors import DetectorConfig
from .states import FockVector, StateSpec, coherent_state, make_cat

MATRIX_CRITERIA = ("min_eig",)
RATIO_CRITERIA = ("moment_ratio", "mean_photon_number")

SET_PRESETS = ("integer", "half", "all")


@dataclass(frozen=True)
class StateInput:
    """State family under test; cat parity "both" sweeps even and odd."""

    kind: str
    parity: str | None = None
    modes: int = 1
    coefficients: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("coherent", "cat", "fock"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.kind == "cat" and self.parity not in ("even", "odd", "both"):
            raise ValueError("cat states need parity 'even', 'odd', or 'both'")
        if self.kind != "cat" and self.parity is not None:
            raise ValueError(f"{self.kind} states take no parity")
        if self.kind == "fock" and not self.coefficients:
            raise ValueError("fock states need coefficients")
        if self.kind != "fock" and self.coefficients is not None:
            raise ValueError(f"{self.kind} states take no coefficients")
        if self.modes < 1:
            raise ValueError("modes must be >= 1")

    def build(self, alpha2: float, modes: int | None = None) -> list[tuple[str, StateSpec]]:
        """States at total input intensity |alpha|^2, split equally over modes."""
        modes = modes or self.modes
        amp = math.sqrt(alpha2 / modes)
        if self.kind == "coherent":
            return [("coherent", coherent_state(amp, modes))]
        if self.kind == "fock":
            return [("fock", FockVector(self.coefficients))]
        parities = ("even", "odd") if self.parity == "both" else (self.parity,)
        return [
            (f"cat_{parity}", make_cat(amp, parity, modes)) for parity in parities
        ]


@dataclass(frozen=True)
class SweepSpec:
    """Grid over the sweep variable (the total input intensity |alpha|^2)."""

    start: float
    stop: float
    points: int
    scale: str = "log"
    variable: str = "alpha2"

    def __post_init__(self):
        if self.points < 1:
            raise ValueError("points must be >= 1")
        if self.scale not in ("log", "linear"):
            raise ValueError("scale must be 'log' or 'linear'")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log grids need positive endpoints")
        if self.variable != "alpha2":
            raise ValueError("only the 'alpha2' sweep variable is supported")

    def grid(self) -> tuple[float, ...]:
        if self.points == 1:
            return (float(self.start),)
        if self.scale == "log":
            values = np.logspace(
                math.log10(self.start), math.log10(self.stop), self.points
            )
        else:
            values = np.linspace(self.start, self.stop, self.points)
        return tuple(float(v) for v in values)


@dataclass(frozen=True)
class OutputSpec:
    path: str = "results"
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")


@dataclass(frozen=True)
class Scenario:
    """A named, fully determined computation producing one file per
    (index set x criterion)."""

    name: str
    state: StateInput
    sweep: SweepSpec
    output: OutputSpec = field(default_factory=OutputSpec)
    detector: DetectorConfig | None = None
    sets: object = "all"          # preset name or tuple of (label, elements)
    kinds: tuple[str, ...] = ("counts",)
    criteria: tuple[str, ...] = MATRIX_CRITERIA
    mode_counts: tuple[int, ...] = ()
    cases: tuple[str, ...] = ()

    def __post_init__(self):
        if tuple(self.criteria) == MATRIX_CRITERIA:
            if self.detector is None:
                raise ValueError("matrix scenarios need a detector config")
            if isinstance(self.sets, str) and self.sets not in SET_PRESETS:
                raise ValueError(f"unknown set preset {self.sets!r}")
            for kind in self.kinds:
                if kind not in ("counts", "moments"):
                    raise ValueError(f"unknown matrix kind {kind!r}")
        elif tuple(self.criteria) == RATIO_CRITERIA:
            if not self.mode_counts or not self.cases:
                raise ValueError("ratio scenarios need mode_counts and cases")
            for case in self.cases:
                if case not in ("i", "ii", "iii", "iv"):
                    raise ValueError(f"unknown ratio case {case!r}")
        else:
            raise ValueError(f"unsupported criteria {self.criteria!r}")


# --------------------------------------------------------------------------
# strict JSON parsing


def _take(raw: dict, context: str, known: dict) -> dict:
    unknown = set(raw) - set(known)
    if unknown:
        raise ValueError(f"unknown {context} fields: {sorted(unknown)}")
    out = {}
    for key, convert in known.items():
        if key in raw and raw[key] is not None:
            out[key] = convert(raw[key])
    return out


def _as_tuple(values):
    return tuple(values)


def _parse_sets(raw):
    if isinstance(raw, str):
        return raw
    parsed = []
    for i, entry in enumerate(raw):
        if isinstance(entry, dict):
            unknown = set(entry) - {"label", "elements"}
            if unknown:
                raise ValueError(f"unknown set fields: {sorted(unknown)}")
            label = entry.get("label", f"custom{i}")
            elements = entry["elements"]
        else:
            label, elements = f"custom{i}", entry
        elements = tuple(
            tuple(e) if isinstance(e, list) else e for e in elements
        )
        parsed.append((str(label), elements))
    return tuple(parsed)


def scenario_from_json(text: str) -> Scenario:
    """Parse a scenario document, rejecting unknown fields at every level."""
    raw = json.loads(text)
    if not isinstance(raw, dict):
        raise ValueError("scenario document must be a JSON object")
    fields = _take(raw, "scenario", {
        "name": str,
        "state": dict,
        "detector": dict,
        "sets": _parse_sets,
        "kinds": _as_tuple,
        "criteria": _as_tuple,
        "mode_counts": _as_tuple,
        "cases": _as_tuple,
        "sweep": dict,
        "output": dict,
    })
    if "state" in fields:
        state_kwargs = _take(fields["state"], "state", {
            "kind": str,
            "parity": str,
            "modes": int,
            "coefficients": _as_tuple,
        })
        fields["state"] = StateInput(**state_kwargs)
    if "detector" in fields:
        det_kwargs = _take(fields["detector"], "detector", {
            "model": str,
            "efficiency": float,
            "dark": float,
            "bins": int,
            "levels": int,
        })
        fields["detector"] = DetectorConfig(**det_kwargs)
    if "sweep" in fields:
        sweep_kwargs = _take(fields["sweep"], "sweep", {
            "start": float,
            "stop": float,
            "points": int,
            "scale": str,
            "variable": str,
        })
        fields["sweep"] = SweepSpec(**sweep_kwargs)
    if "output" in fields:
        out_kwargs = _take(fields["output"], "output", {
            "path": str,
            "format": str,
        })
        fields["output"] = OutputSpec(**out_kwargs)
    return Scenario(**fields)


# --------------------------------------------------------------------------
# figure presets


def presets() -> dict[str, Scenario]:
    """Frozen scenarios for the cat-state case-study figures."""
    cat_both = StateInput("cat", parity="both")
    grid = SweepSpec(start=1e-2, stop=1e1, points=200)
    return {
        # Photocount and photon-moment 2x2 determinants, sets {1,2} and
        # {1/2,3/2}, at 50% detection loss.
        "fig1": Scenario(
            name="fig1",
            state=cat_both,
            detector=DetectorConfig.photoelectric(efficiency=0.5),
            sets=(("integer", (1, 2)), ("half", ("1/2", "3/2"))),
            kinds=("counts", "moments"),
            sweep=grid,
        ),
        # Click-counting matrices for N = 5 on-off bins at 50% efficiency.
        "fig3": Scenario(
            name="fig3",
            state=cat_both,
            detector=DetectorConfig.onoff(bins=5, efficiency=0.5),
            sets="all",
            kinds=("counts",),
            sweep=grid,
        ),
        # Same detection settings, click-moment matrices.
        "fig4": Scenario(
            name="fig4",
            state=cat_both,
            detector=DetectorConfig.onoff(bins=5, efficiency=0.5),
            sets="all",
            kinds=("moments",),
            sweep=grid,
        ),
        # Multinomial counting matrices, N = 4 bins resolving 0/1/2+ photons,
        # all four admissible class patterns, 50% efficiency.
        "fig5": Scenario(
            name="fig5",
            state=cat_both,
            detector=DetectorConfig.pnr(bins=4, levels=2, efficiency=0.5),
            sets="all",
            kinds=("counts",),
            sweep=grid,
        ),
        # Multimode moment-ratio criteria, cases (ii) and (iii), for
        # mu in {1, 2, 3, 5} modes; ratios are efficiency-invariant, so the
        # ideal response is used and the mean photon number is emitted
        # alongside for the x axis.
        "fig6": Scenario(
            name="fig6",
            state=cat_both,
            sweep=SweepSpec(start=1e-2, stop=20.0, points=200),
            criteria=RATIO_CRITERIA,
            mode_counts=(1, 2, 3, 5),
            cases=("ii", "iii"),
        ),
    }
