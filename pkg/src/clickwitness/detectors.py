"""Counting distributions and normally ordered moments for three detector models.

* photoelectric: full photon-number resolution, response G = eta n + nu
* onoff: N multiplexed on-off bins, response G = (eta/N) n + nu per bin
* pnr: N multiplexed bins, each resolving 0, 1, ..., K-1, or "K or more"
  photons (K = 1 reduces exactly to the on-off model)

Dark counts nu enter per bin through the affine response.  All outcome
probabilities and moments are expectations of :class:`~.states.NOExpr`
expressions; the expressions are built once per configuration and cached,
since parameter sweeps re-evaluate them at thousands of amplitudes.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .numerics import MAX_EXACT_N, binom, falling_factorial, multinom
from .states import (
    CoherentSuperposition,
    FockVector,
    Mixture,
    NOExpr,
    StateSpec,
    expect_any,
    expect_fock,
)

_NEG_TOL = 1e-14
_NORM_TOL = 1e-10
_MAX_OUTCOMES = 100_000

PHOTOELECTRIC = "photoelectric"
ONOFF = "onoff"
PNR = "pnr"


@dataclass(frozen=True)
class DetectorConfig:
    """Detector model plus efficiency and per-bin dark-count parameter."""

    model: str
    efficiency: float = 1.0
    dark: float = 0.0
    bins: int | None = None
    levels: int | None = None

    def __post_init__(self):
        if self.model not in (PHOTOELECTRIC, ONOFF, PNR):
            raise ValueError(f"unknown detector model {self.model!r}")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if self.dark < 0.0:
            raise ValueError(f"dark parameter must be >= 0, got {self.dark}")
        if self.model == PHOTOELECTRIC:
            if self.bins is not None or self.levels is not None:
                raise ValueError("photoelectric model takes no bins or levels")
        else:
            if self.bins is None or self.bins < 1:
                raise ValueError(f"{self.model} model needs bins >= 1")
            if self.bins > MAX_EXACT_N:
                raise ValueError(f"bins capped at {MAX_EXACT_N}")
            if self.model == ONOFF and self.levels is not None:
                raise ValueError("onoff model takes no levels")
            if self.model == PNR and (self.levels is None or self.levels < 1):
                raise ValueError("pnr model needs levels >= 1")

    @classmethod
    def photoelectric(cls, efficiency: float = 1.0, dark: float = 0.0):
        return cls(PHOTOELECTRIC, efficiency, dark)

    @classmethod
    def onoff(cls, bins: int, efficiency: float = 1.0, dark: float = 0.0):
        return cls(ONOFF, efficiency, dark, bins=bins)

    @classmethod
    def pnr(cls, bins: int, levels: int, efficiency: float = 1.0, dark: float = 0.0):
        return cls(PNR, efficiency, dark, bins=bins, levels=levels)

    @property
    def gamma_rate(self) -> float:
        """Multiplier of n inside the response: eta for photoelectric, eta/N else."""
        if self.model == PHOTOELECTRIC:
            return self.efficiency
        return self.efficiency / self.bins


@dataclass(frozen=True, eq=False)
class CountDistribution:
    """Outcome -> probability map over a fixed, lexicographically ordered space.

    Probabilities are clipped at zero if they exceed -1e-14 from roundoff;
    anything more negative raises.  A total probability off from one by more
    than 1e-10 triggers a truncation warning.
    """

    kind: str
    outcomes: tuple
    probs: tuple[float, ...]
    config: DetectorConfig | None = None

    def __post_init__(self):
        if len(self.outcomes) != len(self.probs):
            raise ValueError("outcomes and probs must align")
        cleaned = []
        for outcome, p in zip(self.outcomes, self.probs):
            if p < -_NEG_TOL:
                raise ValueError(f"probability {p} of outcome {outcome} is negative")
            cleaned.append(max(float(p), 0.0))
        object.__setattr__(self, "probs", tuple(cleaned))
        total = sum(cleaned)
        if abs(total - 1.0) > _NORM_TOL:
            warnings.warn(
                f"{self.kind} distribution sums to {total!r}; "
                "outcome space is likely truncated",
                stacklevel=2,
            )

    @cached_property
    def as_dict(self) -> dict:
        return dict(zip(self.outcomes, self.probs))

    def prob(self, outcome) -> float:
        return self.as_dict.get(outcome, 0.0)

    def total(self) -> float:
        return sum(self.probs)


# --------------------------------------------------------------------------
# cached expression builders


@lru_cache(maxsize=None)
def _photo_expr(n: int, rate: float, offset: float) -> NOExpr:
    # p_n = <: G^n / n! exp(-G) :>
    return NOExpr.monomial(1.0 / math.factorial(n), n, 1.0, rate, offset)


@lru_cache(maxsize=None)
def _click_expr(bins: int, k: int, rate: float, offset: float) -> NOExpr:
    # c_k / C(N, k) = <: exp(-G)^(N-k) (1 - exp(-G))^k :>, expanded binomially
    terms = tuple(
        (binom(k, j) * (-1.0) ** j, 0, float(bins - k + j)) for j in range(k + 1)
    )
    return NOExpr(terms, rate, offset)


@lru_cache(maxsize=None)
def _click_moment_expr(m: int, rate: float, offset: float) -> NOExpr:
    # <: pi^m :> with pi = 1 - exp(-G)
    terms = tuple((binom(m, j) * (-1.0) ** j, 0, float(j)) for j in range(m + 1))
    return NOExpr(terms, rate, offset)


@lru_cache(maxsize=None)
def _povm_exprs(levels: int, rate: float, offset: float) -> tuple[NOExpr, ...]:
    # pi_j = :G^j/j! exp(-G):  for j < K, and pi_K completes to the identity.
    lower = [
        NOExpr.monomial(1.0 / math.factorial(j), j, 1.0, rate, offset)
        for j in range(levels)
    ]
    last = NOExpr.one(rate, offset)
    for expr in lower:
        last = last - expr
    povm = tuple(lower + [last])
    total = NOExpr.constant(0.0, rate, offset)
    for expr in povm:
        total = total + expr
    if total.terms != ((1.0, 0, 0.0),):
        raise AssertionError(f"POVM does not resolve the identity: {total.terms}")
    return povm


@lru_cache(maxsize=None)
def _povm_product_expr(levels: int, exponents: tuple[int, ...],
                       rate: float, offset: float) -> NOExpr:
    povm = _povm_exprs(levels, rate, offset)
    out = NOExpr.one(rate, offset)
    for expr, e in zip(povm, exponents):
        out = out * expr ** e
    return out


# --------------------------------------------------------------------------
# stable evaluation of POVM power products
#
# Expanding (1 - exp(-G))^k binomially turns a quantity of size ~ gamma^k
# into an alternating sum of order-one terms; for superpositions of +/-
# amplitudes the component normalization further amplifies the roundoff by
# ~ 1/|alpha|^2, which destroys small-amplitude sweeps.  Outcome and moment
# evaluations therefore go through the product form directly, with the
# per-factor exponentials folded into the coherent-overlap exponent.


def _low_poly(y: complex, levels: int) -> complex:
    """sum_{j < levels} y^j / j!"""
    total = 1.0 + 0j
    term = 1.0 + 0j
    for j in range(1, levels):
        term *= y / j
        total += term
    return total


def _tail_series(y: complex, levels: int) -> complex:
    """sum_{j >= levels} y^j / j!, accurate for |y| < 1."""
    term = y ** levels / math.factorial(levels)
    total = term
    j = levels
    while j < levels + 60:
        j += 1
        term *= y / j
        total += term
        if abs(term) <= 1e-20 * max(abs(total), 1e-300):
            break
    return total


def _pair_product_value(y: complex, overlap_exp: complex,
                        exponents: tuple[int, ...], levels: int) -> complex:
    """prod_j pi_j(y)^{e_j} times exp(overlap_exp), evaluated stably.

    pi_j(y) = y^j/j! exp(-y) for j < K and pi_K(y) = 1 - exp(-y) poly(y);
    every exp(-y) factor is folded into the overlap exponent so that large
    opposing exponents cancel analytically.
    """
    folded = sum(exponents[:levels])
    poly = 1.0 + 0j
    for j in range(1, levels):
        if exponents[j]:
            poly *= (y ** j / math.factorial(j)) ** exponents[j]
    last = exponents[levels]
    if last:
        if abs(y) < 1.0:
            poly *= _tail_series(y, levels) ** last
            folded += last
        else:
            poly *= (1.0 - cmath.exp(-y) * _low_poly(y, levels)) ** last
    return cmath.exp(overlap_exp - folded * y) * poly


def povm_product_value(state: StateSpec, cfg: DetectorConfig,
                       exponents: tuple[int, ...]) -> float:
    """Expectation <: pi_0^{e_0} ... pi_K^{e_K} :> via the product form.

    The on-off model is the K = 1 case with exponents (no-click, click).
    Fock-basis states fall back to the expanded-expression oracle, which is
    stable there because probabilities enter with positive weights.
    """
    if cfg.model == PHOTOELECTRIC:
        raise ValueError("POVM products apply to the multiplexed models")
    levels = 1 if cfg.model == ONOFF else cfg.levels
    exponents = tuple(int(e) for e in exponents)
    if len(exponents) != levels + 1 or any(e < 0 for e in exponents):
        raise ValueError(f"need {levels + 1} nonnegative exponents, got {exponents}")
    if isinstance(state, Mixture):
        return sum(
            p * povm_product_value(part, cfg, exponents) for p, part in state.parts
        )
    if isinstance(state, FockVector):
        return expect_fock(
            state, _povm_product_expr(levels, exponents, cfg.gamma_rate, cfg.dark)
        )
    if not isinstance(state, CoherentSuperposition):
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if state.modes != 1:
        raise ValueError("detector models address a single mode")
    rate, offset = cfg.gamma_rate, cfg.dark
    total = 0j
    for wi, (ai,) in zip(state.weights, state.amplitudes):
        for wj, (aj,) in zip(state.weights, state.amplitudes):
            pair = wi.conjugate() * wj
            if pair == 0j:
                continue
            x = ai.conjugate() * aj
            overlap_exp = -0.5 * (abs(ai) ** 2 + abs(aj) ** 2) + x
            y = rate * x + offset
            total += pair * _pair_product_value(y, overlap_exp, exponents, levels)
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"non-Hermitian imaginary residual: {total}")
    return total.real


# --------------------------------------------------------------------------
# public expression accessors (shared with the witness-matrix assembly)


def photo_count_expression(cfg: DetectorConfig, n: int) -> NOExpr:
    """Expression whose expectation is the photocount probability p_n."""
    return _photo_expr(n, cfg.gamma_rate, cfg.dark)


def click_outcome_expression(cfg: DetectorConfig, k: int) -> NOExpr:
    """Expression whose expectation is c_k / C(N, k)."""
    return _click_expr(cfg.bins, k, cfg.gamma_rate, cfg.dark)


def click_moment_expression(cfg: DetectorConfig, m: int) -> NOExpr:
    """Expression whose expectation is <: pi^m :>."""
    return _click_moment_expr(m, cfg.gamma_rate, cfg.dark)


def povm_product_expression(cfg: DetectorConfig,
                            exponents: tuple[int, ...]) -> NOExpr:
    """Expression whose expectation is <: pi_0^{e_0} ... pi_K^{e_K} :>."""
    return _povm_product_expr(cfg.levels, tuple(exponents), cfg.gamma_rate, cfg.dark)


# --------------------------------------------------------------------------
# photoelectric model


def photo_distribution(state: StateSpec, cfg: DetectorConfig,
                       n_max: int = 60) -> CountDistribution:
    """Photocount distribution p_n for n = 0 .. n_max."""
    if cfg.model != PHOTOELECTRIC:
        raise ValueError("photo_distribution needs a photoelectric config")
    rate, offset = cfg.gamma_rate, cfg.dark
    probs = [
        expect_any(state, _photo_expr(n, rate, offset)) for n in range(n_max + 1)
    ]
    return CountDistribution("photo", tuple(range(n_max + 1)), tuple(probs), cfg)


def factorial_moment(state: StateSpec, cfg: DetectorConfig, m: int) -> float:
    """Normally ordered moment <: (eta n)^m :> of the attenuated photon number."""
    if m < 0:
        raise ValueError("moment order must be >= 0")
    return expect_any(state, NOExpr.monomial(1.0, m, 0.0, cfg.efficiency, 0.0))


def factorial_moment_from_counts(counts: CountDistribution, m: int) -> float:
    """Same moment recovered from a photocount distribution as sum n!/(n-m)! p_n."""
    if counts.kind != "photo":
        raise ValueError("needs a photocount distribution")
    return sum(
        falling_factorial(n, m) * p for n, p in zip(counts.outcomes, counts.probs)
    )


# --------------------------------------------------------------------------
# multiplexed on-off model


def click_distribution(state: StateSpec, cfg: DetectorConfig) -> CountDistribution:
    """Click distribution c_k = C(N,k) <: exp(-G)^(N-k) (1-exp(-G))^k :>."""
    if cfg.model != ONOFF:
        raise ValueError("click_distribution needs an onoff config")
    bins = cfg.bins
    probs = [
        binom(bins, k) * povm_product_value(state, cfg, (bins - k, k))
        for k in range(bins + 1)
    ]
    return CountDistribution("click", tuple(range(bins + 1)), tuple(probs), cfg)


def click_moment(state: StateSpec, cfg: DetectorConfig, m: int) -> float:
    """Click moment <: pi^m :>, pi = 1 - exp(-G), via the operator route."""
    if cfg.model != ONOFF:
        raise ValueError("click_moment needs an onoff config")
    if not 0 <= m <= cfg.bins:
        raise ValueError(f"moment order must satisfy 0 <= m <= N={cfg.bins}")
    return povm_product_value(state, cfg, (0, m))


def click_moment_from_counts(counts: CountDistribution, m: int) -> float:
    """Click moment recovered from the click statistics.

    <: pi^m :> = sum_{k >= m} [C(k, m) / C(N, m)] c_k; this is the route an
    experiment takes, and it must agree with :func:`click_moment`.
    """
    if counts.kind != "click":
        raise ValueError("needs a click distribution")
    bins = counts.config.bins
    if not 0 <= m <= bins:
        raise ValueError(f"moment order must satisfy 0 <= m <= N={bins}")
    norm = binom(bins, m)
    return sum(
        binom(k, m) / norm * p
        for k, p in zip(counts.outcomes, counts.probs)
        if k >= m
    )


# --------------------------------------------------------------------------
# multiplexed detectors with intrinsic resolution


def pnr_povm(cfg: DetectorConfig) -> list[NOExpr]:
    """Per-bin outcome operators pi_0 .. pi_K; they sum to the identity exactly."""
    if cfg.model != PNR:
        raise ValueError("pnr_povm needs a pnr config")
    return list(_povm_exprs(cfg.levels, cfg.gamma_rate, cfg.dark))


def pnr_outcomes(bins: int, levels: int):
    """All (N_0, ..., N_K) with sum N, in lexicographic order."""

    def rec(remaining: int, slots: int):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in rec(remaining - first, slots - 1):
                yield (first, *rest)

    return list(rec(bins, levels + 1))


def pnr_distribution(state: StateSpec, cfg: DetectorConfig) -> CountDistribution:
    """Multinomial outcome distribution c_{N_0, ..., N_K} over all bin splits."""
    if cfg.model != PNR:
        raise ValueError("pnr_distribution needs a pnr config")
    bins, levels = cfg.bins, cfg.levels
    n_outcomes = math.comb(bins + levels, levels)
    if n_outcomes > _MAX_OUTCOMES:
        raise ValueError(
            f"outcome space of size {n_outcomes} exceeds the {_MAX_OUTCOMES} guard"
        )
    outcomes = pnr_outcomes(bins, levels)
    probs = [
        multinom(bins, outcome) * povm_product_value(state, cfg, outcome)
        for outcome in outcomes
    ]
    return CountDistribution("pnr", tuple(outcomes), tuple(probs), cfg)


def pnr_moment(state: StateSpec, cfg: DetectorConfig,
               exponents: tuple[int, ...]) -> float:
    """Expectation <: pi_0^{e_0} ... pi_K^{e_K} :> of a POVM power product."""
    if cfg.model != PNR:
        raise ValueError("pnr_moment needs a pnr config")
    return povm_product_value(state, cfg, tuple(exponents))


def pnr_moment_from_counts(counts: CountDistribution,
                           exponents: tuple[int, ...]) -> float:
    """POVM moment recovered from multinomial statistics.

    Uses the factorial-moment identity of the multinomial distribution:
    E[prod_j (N_j)_(e_j)] = (N)_(sum e) <: prod_j pi_j^{e_j} :>.
    """
    if counts.kind != "pnr":
        raise ValueError("needs a pnr distribution")
    bins = counts.config.bins
    exponents = tuple(int(e) for e in exponents)
    order = sum(exponents)
    if order > bins:
        raise ValueError(f"total order {order} exceeds N={bins}")
    norm = falling_factorial(bins, order)
    out = 0.0
    for outcome, p in zip(counts.outcomes, counts.probs):
        weight = 1
        for n_j, e_j in zip(outcome, exponents):
            weight *= falling_factorial(n_j, e_j)
            if weight == 0:
                break
        if weight:
            out += weight * p
    return out / norm
