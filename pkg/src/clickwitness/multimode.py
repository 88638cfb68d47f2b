"""Multimode photon-number moments, coincidence counts, and ratio criteria.

Each mode carries its own integer or half-odd exponent class, giving 2^mu
distinct witness-matrix families for mu modes.  Matrix entries always use
whole-integer exponent sums; half-integer components only ever appear
through the pairing rule.  A uniform per-mode efficiency eta is applied as
n_j -> eta n_j in the moments; the ratio criteria are invariant under it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import HalfInt, SymMatrix
from .states import NOExpr, StateSpec, expect
from .witnesses import (
    INDETERMINATE,
    NONCLASSICAL,
    NO_VIOLATION,
    WitnessReport,
    _report,
)

MAX_MODES = 8
MAX_SET_SIZE = 64

DIVERGENT = "divergent"


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Per-mode half-integer exponents (k_1, ..., k_mu)."""

    parts: tuple[HalfInt, ...]

    def __post_init__(self):
        parts = tuple(HalfInt.of(p) for p in self.parts)
        if not parts:
            raise ValueError("multi-index needs at least one mode")
        if any(p.twice < 0 for p in parts):
            raise ValueError("multi-index exponents must be nonnegative")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, values) -> "MultiIndex":
        return cls(tuple(HalfInt.of(v) for v in values))

    @property
    def modes(self) -> int:
        return len(self.parts)

    def total(self) -> HalfInt:
        return HalfInt(sum(p.twice for p in self.parts))

    @property
    def is_whole(self) -> bool:
        return all(p.is_integer for p in self.parts)

    def to_ints(self) -> tuple[int, ...]:
        return tuple(p.to_int() for p in self.parts)

    def factorial(self) -> int:
        return math.prod(math.factorial(m) for m in self.to_ints())

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if not isinstance(other, MultiIndex):
            return NotImplemented
        if other.modes != self.modes:
            raise ValueError(f"mode mismatch: {self.modes} vs {other.modes}")
        return MultiIndex(tuple(a + b for a, b in zip(self.parts, other.parts)))

    def __mul__(self, factor: int) -> "MultiIndex":
        if not isinstance(factor, int):
            return NotImplemented
        return MultiIndex(tuple(p * factor for p in self.parts))

    __rmul__ = __mul__

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


def _require_modes(state: StateSpec, index: MultiIndex) -> None:
    if state.modes != index.modes:
        raise ValueError(
            f"state has {state.modes} modes but the index has {index.modes}"
        )


def joint_moment(state: StateSpec, index: MultiIndex, eta: float = 1.0) -> float:
    """Joint normally ordered moment <: prod_j (eta n_j)^(m_j) :>."""
    _require_modes(state, index)
    if not index.is_whole:
        raise ValueError(f"moment exponents must be whole integers, got {index}")
    exprs = [NOExpr.monomial(1.0, m, 0.0, eta, 0.0) for m in index.to_ints()]
    return expect(state, exprs)


def joint_counts(state: StateSpec, index: MultiIndex, eta: float = 1.0) -> float:
    """Coincidence probability p_m of detecting m_j photons in mode j."""
    _require_modes(state, index)
    if not index.is_whole:
        raise ValueError(f"coincidence outcomes must be whole integers, got {index}")
    exprs = [
        NOExpr.monomial(1.0 / math.factorial(m), m, 1.0, eta, 0.0)
        for m in index.to_ints()
    ]
    return expect(state, exprs)


def mean_total_photons(state: StateSpec, eta: float = 1.0) -> float:
    """Total detected photon number sum_j <eta n_j>."""
    total = 0.0
    for mode in range(state.modes):
        parts = tuple(HalfInt(2 if j == mode else 0) for j in range(state.modes))
        total += joint_moment(state, MultiIndex(parts), eta)
    return total


def mode_class_patterns(modes: int):
    """All 2^mu integer/half class assignments, one per mode."""
    if modes > MAX_MODES:
        raise ValueError(f"mode count capped at {MAX_MODES}")
    for bits in range(2 ** modes):
        yield tuple("half" if (bits >> j) & 1 else "integer" for j in range(modes))


def _validate_set(elements: tuple[MultiIndex, ...]) -> tuple[MultiIndex, ...]:
    if not elements:
        raise ValueError("index set is empty")
    if len(elements) > MAX_SET_SIZE:
        raise ValueError(f"index sets capped at {MAX_SET_SIZE} elements")
    modes = elements[0].modes
    if any(e.modes != modes for e in elements):
        raise ValueError("elements must share the mode count")
    elements = tuple(sorted(set(elements)))
    first = elements[0]
    for element in elements[1:]:
        for mode, (a, b) in enumerate(zip(first.parts, element.parts)):
            if not (a + b).is_integer:
                raise ValueError(
                    f"elements {first} and {element} have mixed classes in "
                    f"mode {mode + 1}"
                )
    return elements


def multimode_matrices(state: StateSpec, elements, eta: float = 1.0,
                       kind: str = "moments") -> WitnessReport:
    """Multimode counting (C) or moment (M) witness matrix.

    Entries are (k+l)! p_(k+l) for ``kind="counts"`` and <: n^(k+l) :> for
    ``kind="moments"``; the index set must carry one fixed class per mode.
    """
    if kind not in ("counts", "moments"):
        raise ValueError("kind must be 'counts' or 'moments'")
    elements = _validate_set(tuple(
        e if isinstance(e, MultiIndex) else MultiIndex.of(e) for e in elements
    ))
    if state.modes != elements[0].modes:
        raise ValueError(
            f"state has {state.modes} modes, set has {elements[0].modes}"
        )

    if kind == "moments":
        def entry(i, j):
            return joint_moment(state, elements[i] + elements[j], eta)
    else:
        def entry(i, j):
            pair = elements[i] + elements[j]
            return pair.factorial() * joint_counts(state, pair, eta)
    matrix = SymMatrix.build(len(elements), entry)
    meta = {"state": state, "eta": eta, "elements": elements}
    return _report(matrix, elements, f"{kind}:multimode", meta)


@dataclass(frozen=True)
class RatioResult:
    ratio: float
    case: str | None
    verdict: str


def _classify(n: MultiIndex, m: MultiIndex) -> str:
    """Case label from the exponent totals: (i)/(ii) integer totals with
    even/odd sum, (iii)/(iv) half-odd totals with even/odd sum."""
    n_tot, m_tot = n.total(), m.total()
    pair = n_tot + m_tot
    if not pair.is_integer:
        raise ValueError(f"totals {n_tot} and {m_tot} have mixed classes")
    parity = pair.to_int() % 2
    if n_tot.is_integer:
        return "i" if parity == 0 else "ii"
    return "iii" if parity == 0 else "iv"


def ratio_criterion(state: StateSpec, n: MultiIndex, m: MultiIndex,
                    eta: float = 1.0) -> RatioResult:
    """Moment ratio <:n^(m+n):>^2 / (<:n^(2m):> <:n^(2n):>).

    Classical light keeps the ratio at or below one.  For even and odd
    superpositions of +/- coherent amplitudes the four class/parity cases
    give 1, tanh^(+/-2), coth^(+/-2), and 1 respectively.
    """
    pair = n + m
    if not pair.is_whole:
        raise ValueError(f"{n} and {m} are not pairwise admissible")
    case = _classify(n, m)
    numer = joint_moment(state, pair, eta) ** 2
    denom = joint_moment(state, n * 2, eta) * joint_moment(state, m * 2, eta)
    if denom == 0.0:
        return RatioResult(math.nan, case, INDETERMINATE)
    ratio = numer / denom
    verdict = NONCLASSICAL if ratio > 1.0 + 1e-10 else NO_VIOLATION
    return RatioResult(ratio, case, verdict)


def count_ratio_criterion(state: StateSpec, n: MultiIndex, m: MultiIndex,
                          eta: float = 1.0) -> RatioResult:
    """Coincidence-count ratio [(m+n)! p_(n+m)]^2 / [(2m)! p_(2m) (2n)! p_(2n)].

    Values above one witness nonclassicality.  At unit efficiency the
    denominator can vanish identically for parity eigenstates; a vanishing
    denominator with a finite numerator is reported as divergent (formally
    an infinite violation), and 0/0 as indeterminate.
    """
    pair = n + m
    if not pair.is_whole:
        raise ValueError(f"{n} and {m} are not pairwise admissible")
    case = _classify(n, m)
    numer = (pair.factorial() * joint_counts(state, pair, eta)) ** 2
    dn = (n * 2).factorial() * joint_counts(state, n * 2, eta)
    dm = (m * 2).factorial() * joint_counts(state, m * 2, eta)
    denom = dn * dm
    if denom == 0.0:
        if numer == 0.0:
            return RatioResult(math.nan, case, INDETERMINATE)
        return RatioResult(math.inf, case, DIVERGENT)
    ratio = numer / denom
    verdict = NONCLASSICAL if ratio > 1.0 + 1e-10 else NO_VIOLATION
    return RatioResult(ratio, case, verdict)
