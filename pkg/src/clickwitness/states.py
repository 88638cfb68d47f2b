"""Quantum states and normally ordered expectation values.

Two evaluation backends are provided and kept deliberately independent:

* :func:`expect` handles coherent superpositions analytically.  For a
  normally ordered function ``h`` of the photon-number operator, cross terms
  between coherent components obey ``<a|:h(n):|b> = <a|b> h(conj(a) b)``, so
  every expectation reduces to a finite sum over component pairs.
* :func:`expect_fock` handles Fock-basis states through the closed form
  ``<n|:n^m exp(-s n):|n> = n!/(n-m)! (1-s)^(n-m)`` and serves as the
  brute-force oracle for the analytic backend.

The carrier for all detector quantities is :class:`NOExpr`: a sum of terms
``coeff * :G^power exp(-decay G):`` with the affine response
``G = rate * n + offset`` (``offset`` models dark counts).  Normal ordering
makes these behave like scalar functions of the photon number, so products
and powers expand termwise.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

_NORM_TOL = 1e-12
_IMAG_TOL = 1e-10
_TAIL_TOL = 1e-14
_SUPPORT_TOL = 1e-14
_FOCK_START = 60
_FOCK_CAP = 960


# --------------------------------------------------------------------------
# normally ordered expressions


@lru_cache(maxsize=None)
def _term_arrays(terms):
    coeffs = np.array([t[0] for t in terms], dtype=float)
    powers = np.array([t[1] for t in terms], dtype=np.int64)
    decays = np.array([t[2] for t in terms], dtype=float)
    return coeffs, powers, decays


@dataclass(frozen=True)
class NOExpr:
    """Normally ordered expression sum_t coeff_t :G^power_t exp(-decay_t G):.

    ``G = rate * n + offset`` is shared by all terms.  The algebra is closed
    under addition and multiplication (powers add, decays add), with the
    constant term ``(1, 0, 0)`` as the multiplicative identity.
    """

    terms: tuple[tuple[float, int, float], ...]
    rate: float
    offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0.0):
            raise ValueError(f"rate must be finite and >= 0, got {self.rate}")
        if not (math.isfinite(self.offset) and self.offset >= 0.0):
            raise ValueError(f"offset must be finite and >= 0, got {self.offset}")
        canon = []
        for coeff, power, decay in self.terms:
            coeff = float(coeff)
            power = int(power)
            decay = float(decay)
            if not math.isfinite(coeff):
                raise ValueError("term coefficients must be finite")
            if power < 0:
                raise ValueError("term powers must be nonnegative integers")
            canon.append((coeff, power, decay))
        canon.sort(key=lambda t: (t[1], t[2], t[0]))
        object.__setattr__(self, "terms", tuple(canon))

    # -- constructors

    @classmethod
    def monomial(cls, coeff: float, power: int, decay: float,
                 rate: float, offset: float = 0.0) -> "NOExpr":
        return cls(((coeff, power, decay),), rate, offset)

    @classmethod
    def one(cls, rate: float, offset: float = 0.0) -> "NOExpr":
        return cls(((1.0, 0, 0.0),), rate, offset)

    @classmethod
    def constant(cls, value: float, rate: float, offset: float = 0.0) -> "NOExpr":
        return cls(((float(value), 0, 0.0),), rate, offset)

    # -- algebra

    def _require_compatible(self, other: "NOExpr") -> None:
        if self.rate != other.rate or self.offset != other.offset:
            raise ValueError(
                "cannot combine expressions with different responses: "
                f"({self.rate}, {self.offset}) vs ({other.rate}, {other.offset})"
            )

    @classmethod
    def _from_acc(cls, acc: dict, rate: float, offset: float) -> "NOExpr":
        terms = tuple(
            (coeff, power, decay)
            for (power, decay), coeff in acc.items()
            if coeff != 0.0
        )
        return cls(terms, rate, offset)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = NOExpr.constant(other, self.rate, self.offset)
        if not isinstance(other, NOExpr):
            return NotImplemented
        self._require_compatible(other)
        acc: dict = {}
        for coeff, power, decay in self.terms + other.terms:
            key = (power, decay)
            acc[key] = acc.get(key, 0.0) + coeff
        return NOExpr._from_acc(acc, self.rate, self.offset)

    __radd__ = __add__

    def __neg__(self):
        return NOExpr(
            tuple((-c, p, d) for c, p, d in self.terms), self.rate, self.offset
        )

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = NOExpr.constant(other, self.rate, self.offset)
        if not isinstance(other, NOExpr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return NOExpr(
                tuple((c * other, p, d) for c, p, d in self.terms),
                self.rate,
                self.offset,
            )
        if not isinstance(other, NOExpr):
            return NotImplemented
        self._require_compatible(other)
        acc: dict = {}
        for c1, p1, d1 in self.terms:
            for c2, p2, d2 in other.terms:
                key = (p1 + p2, d1 + d2)
                acc[key] = acc.get(key, 0.0) + c1 * c2
        return NOExpr._from_acc(acc, self.rate, self.offset)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("expression powers must be nonnegative integers")
        out = NOExpr.one(self.rate, self.offset)
        for _ in range(exponent):
            out = out * self
        return out

    # -- evaluation

    def value_with_exponent(self, x: complex, extra: complex = 0j) -> complex:
        """Evaluate sum_t coeff_t y^power_t exp(extra - decay_t y) at y = rate x + offset.

        ``extra`` carries the coherent-overlap exponent so that large
        positive and negative exponents cancel before exponentiation; this
        keeps cat-state cross terms finite over wide amplitude sweeps.
        """
        if not self.terms:
            return 0j
        y = self.rate * complex(x) + self.offset
        coeffs, powers, decays = _term_arrays(self.terms)
        vals = coeffs * np.power(y, powers) * np.exp(complex(extra) - decays * y)
        return complex(np.sum(vals))

    def value_at(self, x: complex) -> complex:
        return self.value_with_exponent(x, 0j)

    def max_power(self) -> int:
        return max((p for _, p, _ in self.terms), default=0)


# --------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class CoherentSuperposition:
    """Pure state sum_i w_i |alpha_i>, with one amplitude tuple per component.

    ``amplitudes[i][m]`` is the coherent amplitude of component i in mode m.
    Normalization sum_ij w_i* w_j <alpha_i|alpha_j> = 1 is enforced to 1e-12.
    """

    weights: tuple[complex, ...]
    amplitudes: tuple[tuple[complex, ...], ...]

    def __post_init__(self):
        weights = tuple(complex(w) for w in self.weights)
        amps = tuple(tuple(complex(a) for a in comp) for comp in self.amplitudes)
        if len(weights) != len(amps) or not weights:
            raise ValueError("need one amplitude tuple per weight")
        modes = len(amps[0])
        if modes < 1 or any(len(comp) != modes for comp in amps):
            raise ValueError("all components must share the same mode count")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "amplitudes", amps)
        norm = 0j
        for wi, ai in zip(weights, amps):
            for wj, aj in zip(weights, amps):
                norm += wi.conjugate() * wj * coherent_overlap(ai, aj)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"superposition is not normalized: <psi|psi> = {norm}")

    @property
    def modes(self) -> int:
        return len(self.amplitudes[0])


@dataclass(frozen=True)
class FockVector:
    """Single-mode pure state sum_n c_n |n>, normalized to 1e-12."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("need at least the vacuum coefficient")
        object.__setattr__(self, "coeffs", coeffs)
        norm = sum(abs(c) ** 2 for c in coeffs)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"Fock vector is not normalized: |c|^2 sums to {norm}")

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    @property
    def modes(self) -> int:
        return 1

    def probabilities(self) -> np.ndarray:
        return np.array([abs(c) ** 2 for c in self.coeffs])


@dataclass(frozen=True)
class Mixture:
    """Classical mixture of states; probabilities sum to one within 1e-12."""

    parts: tuple[tuple[float, "StateSpec"], ...]

    def __post_init__(self):
        parts = tuple((float(p), state) for p, state in self.parts)
        if not parts:
            raise ValueError("mixture needs at least one part")
        if any(p < 0.0 for p, _ in parts):
            raise ValueError("mixture probabilities must be nonnegative")
        total = sum(p for p, _ in parts)
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"mixture probabilities sum to {total}, not 1")
        modes = parts[0][1].modes
        if any(state.modes != modes for _, state in parts):
            raise ValueError("all mixture parts must share the same mode count")
        object.__setattr__(self, "parts", parts)

    @property
    def modes(self) -> int:
        return self.parts[0][1].modes


StateSpec = Union[CoherentSuperposition, FockVector, Mixture]


def coherent_overlap(a: Sequence[complex], b: Sequence[complex]) -> complex:
    """Product over modes of <a_m|b_m> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)."""
    exponent = sum(
        -0.5 * (abs(am) ** 2 + abs(bm) ** 2) + am.conjugate() * bm
        for am, bm in zip(a, b)
    )
    return cmath.exp(exponent)


def coherent_state(alpha, modes: int | None = None) -> CoherentSuperposition:
    """Single coherent component |alpha>, possibly multimode."""
    amps = _amplitude_tuple(alpha, modes)
    return CoherentSuperposition((1.0 + 0j,), (amps,))


def _amplitude_tuple(alpha, modes: int | None) -> tuple[complex, ...]:
    if isinstance(alpha, (tuple, list, np.ndarray)):
        amps = tuple(complex(a) for a in alpha)
        if modes is not None and modes != len(amps):
            raise ValueError(f"got {len(amps)} amplitudes for modes={modes}")
        return amps
    return (complex(alpha),) * (modes or 1)


def make_cat(alpha, parity: str, modes: int | None = None) -> CoherentSuperposition:
    """Normalized superposition of |alpha> and |-alpha> with the given parity.

    ``parity`` is "even" (+) or "odd" (-); the odd state is undefined at zero
    amplitude.  A scalar ``alpha`` with ``modes > 1`` is replicated per mode.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    amps = _amplitude_tuple(alpha, modes)
    pumped = sum(abs(a) ** 2 for a in amps)
    if pumped == 0.0:
        if parity == "odd":
            raise ValueError("odd cat state is undefined at zero amplitude")
        return coherent_state(0j, len(amps))
    sign = 1.0 if parity == "even" else -1.0
    weight = 1.0 / math.sqrt(2.0 * (1.0 + sign * math.exp(-2.0 * pumped)))
    minus = tuple(-a for a in amps)
    return CoherentSuperposition((weight, sign * weight), (amps, minus))


# --------------------------------------------------------------------------
# analytic backend


def _per_mode_exprs(expr, modes: int) -> tuple[NOExpr, ...]:
    if isinstance(expr, NOExpr):
        if modes != 1:
            raise ValueError(
                "a multimode state needs one expression per mode; pass a sequence"
            )
        return (expr,)
    exprs = tuple(expr)
    if len(exprs) != modes:
        raise ValueError(f"got {len(exprs)} expressions for {modes} modes")
    if not all(isinstance(e, NOExpr) for e in exprs):
        raise TypeError("per-mode expressions must be NOExpr instances")
    return exprs


def expect(state: StateSpec, expr) -> float:
    """Expectation of a normally ordered expression on the analytic backend.

    Supports coherent superpositions and mixtures thereof; Fock-basis states
    must go through :func:`expect_fock`, which is kept separate as the
    independent oracle.  For multimode states, ``expr`` is a sequence with
    one expression per mode and the product over modes is taken.
    """
    if isinstance(state, Mixture):
        return sum(p * expect(part, expr) for p, part in state.parts)
    if isinstance(state, FockVector):
        raise TypeError("expect handles coherent superpositions; use expect_fock")
    if not isinstance(state, CoherentSuperposition):
        raise TypeError(f"unsupported state type {type(state).__name__}")
    exprs = _per_mode_exprs(expr, state.modes)
    total = 0j
    for wi, ai in zip(state.weights, state.amplitudes):
        for wj, aj in zip(state.weights, state.amplitudes):
            pair = wi.conjugate() * wj
            if pair == 0j:
                continue
            factor = 1.0 + 0j
            for mode_expr, am, bm in zip(exprs, ai, aj):
                x = am.conjugate() * bm
                overlap_exp = -0.5 * (abs(am) ** 2 + abs(bm) ** 2) + x
                factor *= mode_expr.value_with_exponent(x, overlap_exp)
            total += pair * factor
    scale = max(1.0, abs(total.real))
    if abs(total.imag) > _IMAG_TOL * scale:
        raise ArithmeticError(
            f"expectation has a non-Hermitian imaginary residual: {total}"
        )
    return total.real


# --------------------------------------------------------------------------
# Fock-basis oracle


def expect_fock(state, expr: NOExpr) -> float:
    """Expectation on the Fock-basis backend (single mode).

    Uses the closed form ``<n|:n^q exp(-s n):|n> = n!/(n-q)! (1-s)^(n-q)``;
    the affine response ``G = rate n + offset`` is expanded binomially in
    ``offset``, so dark counts are handled exactly.
    """
    if isinstance(state, Mixture):
        return sum(p * expect_fock(part, expr) for p, part in state.parts)
    if isinstance(state, CoherentSuperposition):
        raise TypeError("expect_fock handles Fock-basis states; use expect")
    if not isinstance(state, FockVector):
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if not isinstance(expr, NOExpr):
        raise TypeError("expect_fock evaluates a single-mode NOExpr")

    probs = state.probabilities()
    ns = np.arange(len(probs), dtype=float)
    rate, offset = expr.rate, expr.offset
    total = 0.0
    for coeff, power, decay in expr.terms:
        shrink = 1.0 - decay * rate
        dark = math.exp(-decay * offset)
        if offset == 0.0:
            qs = (power,)
        else:
            qs = range(power + 1)
        for q in qs:
            if offset == 0.0:
                prefactor = rate ** power
            else:
                prefactor = (
                    math.comb(power, q) * offset ** (power - q) * rate ** q
                )
            if prefactor == 0.0:
                continue
            ff = np.ones_like(ns)
            for i in range(q):
                ff = ff * (ns - i)
            ff = np.maximum(ff, 0.0)
            shrink_pow = np.power(shrink, np.maximum(ns - q, 0.0))
            total += coeff * dark * prefactor * float(np.sum(probs * ff * shrink_pow))
    return total


def expect_fock_product(states: Sequence[FockVector], exprs) -> float:
    """Oracle for multimode product states: product of per-mode oracles."""
    exprs = tuple(exprs)
    if len(states) != len(exprs):
        raise ValueError("need one expression per mode")
    out = 1.0
    for state, expr in zip(states, exprs):
        out *= expect_fock(state, expr)
    return out


# --------------------------------------------------------------------------
# conversions and diagnostics


def to_fock(state: StateSpec, n_max: int | None = None):
    """Fock-basis representation of a single-mode state.

    Coherent superpositions expand exactly as
    ``c_n = sum_i w_i exp(-|a_i|^2/2) a_i^n / sqrt(n!)``.  When ``n_max`` is
    omitted it is raised automatically until the truncated tail probability
    drops below 1e-14; a tail above that with an explicit ``n_max`` raises.
    """
    if isinstance(state, FockVector):
        return state
    if isinstance(state, Mixture):
        return Mixture(tuple((p, to_fock(part, n_max)) for p, part in state.parts))
    if not isinstance(state, CoherentSuperposition):
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if state.modes != 1:
        raise ValueError("to_fock supports single-mode states only")

    def coefficients(limit: int) -> list[complex]:
        coeffs = [0j] * (limit + 1)
        for w, (a,) in zip(state.weights, state.amplitudes):
            if a == 0j:
                coeffs[0] += w
                continue
            log_a = cmath.log(a)
            base = -0.5 * abs(a) ** 2
            for n in range(limit + 1):
                coeffs[n] += w * cmath.exp(base + n * log_a - 0.5 * math.lgamma(n + 1))
        return coeffs

    if n_max is not None:
        coeffs = coefficients(n_max)
        tail = 1.0 - sum(abs(c) ** 2 for c in coeffs)
        if tail > _TAIL_TOL:
            raise ValueError(
                f"n_max={n_max} truncates tail probability {tail:.3e} > {_TAIL_TOL}"
            )
        return FockVector(tuple(coeffs))

    limit = _FOCK_START
    while True:
        coeffs = coefficients(limit)
        tail = 1.0 - sum(abs(c) ** 2 for c in coeffs)
        if tail <= _TAIL_TOL:
            return FockVector(tuple(coeffs))
        if limit >= _FOCK_CAP:
            raise ValueError(
                f"tail probability {tail:.3e} still above {_TAIL_TOL} at n={limit}"
            )
        limit *= 2


def photon_number_support(state: StateSpec, n_max: int | None = None) -> set[int]:
    """Set {n : p_n > 1e-14} of the lossless photon-number distribution.

    Even cat states are supported on even n only, odd cats on odd n only;
    this is the parity diagnostic behind the choice of index-set class.
    """
    fock = to_fock(state, n_max)
    if isinstance(fock, Mixture):
        support: set[int] = set()
        for p, part in fock.parts:
            support |= {
                n for n, c in enumerate(part.coeffs) if p * abs(c) ** 2 > _SUPPORT_TOL
            }
        return support
    return {n for n, c in enumerate(fock.coeffs) if abs(c) ** 2 > _SUPPORT_TOL}


# Name used in the module interface for the parity diagnostic.
cat_parity_check = photon_number_support


def expect_any(state: StateSpec, expr) -> float:
    """Dispatch to the analytic or Fock backend by state representation."""
    if isinstance(state, Mixture):
        return sum(p * expect_any(part, expr) for p, part in state.parts)
    if isinstance(state, FockVector):
        if not isinstance(expr, NOExpr):
            exprs = tuple(expr)
            if len(exprs) != 1:
                raise ValueError("Fock states are single mode")
            expr = exprs[0]
        return expect_fock(state, expr)
    return expect(state, expr)
