"""Index-set enumeration, witness matrices, and scalar nonclassicality criteria.

A Gram-type matrix of counts (C) or of normally ordered moments (M) is
positive semidefinite for every classical state; a negative minimal
eigenvalue certifies nonclassical light.  Rows and columns are labelled by
exponents drawn from an index set whose pairwise sums must be whole
integers, which forces every set to consist either of integers only or of
half-odd integers only.  Integer sets are sensitive to odd photon-number
parity, half-integer sets to even parity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detectors import (
    ONOFF,
    PHOTOELECTRIC,
    PNR,
    CountDistribution,
    DetectorConfig,
    click_moment,
    click_moment_from_counts,
    factorial_moment_from_counts,
    pnr_moment_from_counts,
    povm_product_value,
)
from .numerics import (
    HalfInt,
    SymMatrix,
    binom,
    leading_minors,
    min_eigenvalue,
    multinom,
)
from .states import NOExpr, StateSpec, expect_any

# Negativity threshold, relative to the largest matrix entry: matrix scales
# vary by orders of magnitude across amplitude sweeps.
NEG_REL_TOL = 1e-10

_IDENTITY_TOL = 1e-12

INTEGER = "integer"
HALF = "half"

NONCLASSICAL = "nonclassical"
NO_VIOLATION = "no_violation"
INDETERMINATE = "indeterminate"


# --------------------------------------------------------------------------
# index sets


def _element_key(element):
    if isinstance(element, HalfInt):
        return (element.twice,)
    return tuple(part.twice for part in element)


def _format_element(element) -> str:
    if isinstance(element, HalfInt):
        return str(element)
    return "(" + ",".join(str(part) for part in element) + ")"


@dataclass(frozen=True)
class IndexSet:
    """Sorted, distinct matrix labels with a uniform integer/half class.

    Elements are either HalfInt scalars (photoelectric and on-off models)
    or tuples of HalfInt (one slot per detector outcome type, for the
    multinomial model).  Pairwise sums must be whole integers, which is
    equivalent to every slot having a fixed class across the set.
    """

    elements: tuple
    label: str
    model_cap: int | None = None

    def __post_init__(self):
        elems = []
        for element in self.elements:
            if isinstance(element, (tuple, list)):
                elems.append(tuple(HalfInt.of(v) for v in element))
            else:
                elems.append(HalfInt.of(element))
        kinds = {isinstance(e, tuple) for e in elems}
        if len(kinds) > 1:
            raise ValueError("cannot mix scalar and multi-index elements")
        widths = {len(e) for e in elems if isinstance(e, tuple)}
        if len(widths) > 1:
            raise ValueError("multi-index elements must share a width")
        elems = sorted(set(elems), key=_element_key)
        for element in elems:
            parts = element if isinstance(element, tuple) else (element,)
            if any(part.twice < 0 for part in parts):
                raise ValueError(f"negative index in element {_format_element(element)}")
        for i, a in enumerate(elems):
            for b in elems[i:]:
                pa = a if isinstance(a, tuple) else (a,)
                pb = b if isinstance(b, tuple) else (b,)
                if any(not (x + y).is_integer for x, y in zip(pa, pb)):
                    raise ValueError(
                        f"pair {_format_element(a)}, {_format_element(b)} does not "
                        "sum to whole integers"
                    )
        object.__setattr__(self, "elements", tuple(elems))

    @property
    def multi(self) -> bool:
        return bool(self.elements) and isinstance(self.elements[0], tuple)

    @property
    def class_pattern(self) -> tuple[str, ...]:
        """Integer/half class per slot, derived from the first element."""
        if not self.elements:
            return ()
        first = self.elements[0] if self.multi else (self.elements[0],)
        return tuple(INTEGER if part.is_integer else HALF for part in first)

    def describe(self) -> str:
        return "{" + ", ".join(_format_element(e) for e in self.elements) + "}"


def _half_range(cap_twice: int, start_twice: int) -> list[HalfInt]:
    return [HalfInt(t) for t in range(start_twice, cap_twice + 1, 2)]


def enumerate_index_sets(cfg: DetectorConfig,
                         max_order: int | None = None) -> list[IndexSet]:
    """Maximal admissible index sets for a detector configuration.

    Photoelectric and on-off models yield two sets: the integers
    {0, ..., floor(N/2)} and the half-odd integers {1/2, ..., ceil(N/2)-1/2},
    where N is the bin count (or ``max_order``, default 4, for the
    photoelectric model, whose resolution is unbounded).  The multinomial
    model yields 2^K sets: each of the first K outcome slots picks a class,
    and the class of the last slot is forced by the total N/2.  A pattern
    with no admissible multi-index yields an empty, flagged set.
    """
    if cfg.model in (PHOTOELECTRIC, ONOFF):
        cap = cfg.bins if cfg.model == ONOFF else (max_order or 4)
        integers = _half_range(2 * (cap // 2), 0)
        halves = _half_range(cap if cap % 2 else cap - 1, 1)
        return [
            IndexSet(tuple(integers), INTEGER, model_cap=cap),
            IndexSet(tuple(halves), HALF, model_cap=cap),
        ]
    if cfg.model != PNR:
        raise ValueError(f"unknown detector model {cfg.model!r}")
    if cfg.levels > 6:
        raise ValueError("index-set enumeration capped at levels <= 6")
    bins, levels = cfg.bins, cfg.levels
    sets = []
    for pattern_bits in range(2 ** levels):
        bits = [(pattern_bits >> j) & 1 for j in range(levels)]
        last_bit = (bins - sum(bits)) % 2
        pattern = tuple(
            HALF if bit else INTEGER for bit in bits + [last_bit]
        )
        elements = []

        def extend(prefix: list[int], remaining_twice: int, slot: int):
            if slot == levels:
                if remaining_twice >= 0:
                    elements.append(tuple(HalfInt(t) for t in prefix + [remaining_twice]))
                return
            for twice in range(bits[slot], remaining_twice + 1, 2):
                extend(prefix + [twice], remaining_twice - twice, slot + 1)

        extend([], bins, 0)
        label = "-".join("half" if c == HALF else "int" for c in pattern)
        sets.append(IndexSet(tuple(elements), label, model_cap=bins))
    return sets


def enumerate_pnr_moment_sets(cfg: DetectorConfig) -> list[IndexSet]:
    """The 2^(K+1) moment-matrix index sets with element totals <= N/2.

    Moment matrices are less restricted than counting matrices: the last
    slot's class is free, and element totals only need to stay below N/2.
    Not used by default; counting-compatible sets are valid for both.
    """
    if cfg.model != PNR:
        raise ValueError("enumerate_pnr_moment_sets needs a pnr config")
    if cfg.levels > 6:
        raise ValueError("index-set enumeration capped at levels <= 6")
    bins, levels = cfg.bins, cfg.levels
    sets = []
    for pattern_bits in range(2 ** (levels + 1)):
        bits = [(pattern_bits >> j) & 1 for j in range(levels + 1)]
        elements = []

        def extend(prefix: list[int], budget_twice: int, slot: int):
            if slot == levels + 1:
                elements.append(tuple(HalfInt(t) for t in prefix))
                return
            for twice in range(bits[slot], budget_twice + 1, 2):
                extend(prefix + [twice], budget_twice - twice, slot + 1)

        extend([], bins, 0)
        label = "-".join("half" if bit else "int" for bit in bits)
        sets.append(IndexSet(tuple(elements), label, model_cap=bins))
    return sets


# --------------------------------------------------------------------------
# witness reports


@dataclass(frozen=True, eq=False)
class WitnessReport:
    """A witness matrix together with its spectral diagnostics."""

    matrix: SymMatrix
    labels: tuple
    min_eig: float
    minors: tuple[float, ...]
    source: str
    metadata: dict = field(default_factory=dict)

    @property
    def max_abs(self) -> float:
        return self.matrix.max_abs()

    @property
    def tolerance(self) -> float:
        return NEG_REL_TOL * self.max_abs

    @property
    def nonclassical(self) -> bool:
        return self.min_eig < -self.tolerance

    @property
    def verdict(self) -> str:
        return NONCLASSICAL if self.nonclassical else NO_VIOLATION


def _report(matrix: SymMatrix, labels, source: str, metadata: dict) -> WitnessReport:
    return WitnessReport(
        matrix=matrix,
        labels=tuple(labels),
        min_eig=min_eigenvalue(matrix),
        minors=tuple(leading_minors(matrix)),
        source=source,
        metadata=metadata,
    )


def _pair_sum_scalar(a: HalfInt, b: HalfInt) -> int:
    return (a + b).to_int()


def _pair_sum_multi(a: tuple, b: tuple) -> tuple[int, ...]:
    return tuple((x + y).to_int() for x, y in zip(a, b))


def _check_counts_admissible(iset: IndexSet, cfg: DetectorConfig) -> None:
    if not iset.elements:
        raise ValueError(f"index set {iset.label!r} is empty")
    if cfg.model == PNR:
        if not iset.multi or len(iset.elements[0]) != cfg.levels + 1:
            raise ValueError(
                f"index set {iset.label!r} does not match K={cfg.levels} outcomes"
            )
        for element in iset.elements:
            total = sum(part.twice for part in element)
            if total != cfg.bins:
                raise ValueError(
                    f"element {_format_element(element)} sums to {total}/2, "
                    f"needs N/2 = {cfg.bins}/2"
                )
        return
    if iset.multi:
        raise ValueError(f"{cfg.model} model uses scalar index sets")
    if cfg.model == ONOFF:
        for i, a in enumerate(iset.elements):
            for b in iset.elements[i:]:
                if a.twice + b.twice > 2 * cfg.bins:
                    raise ValueError(
                        f"pair {a}, {b} exceeds the click resolution N={cfg.bins}"
                    )


def _check_moments_admissible(iset: IndexSet, cfg: DetectorConfig) -> None:
    if not iset.elements:
        raise ValueError(f"index set {iset.label!r} is empty")
    if cfg.model == PNR:
        if not iset.multi or len(iset.elements[0]) != cfg.levels + 1:
            raise ValueError(
                f"index set {iset.label!r} does not match K={cfg.levels} outcomes"
            )
        for element in iset.elements:
            total = sum(part.twice for part in element)
            if total > cfg.bins:
                raise ValueError(
                    f"element {_format_element(element)} exceeds the moment "
                    f"bound N/2 = {cfg.bins}/2"
                )
        return
    if iset.multi:
        raise ValueError(f"{cfg.model} model uses scalar index sets")
    if cfg.model == ONOFF:
        for i, a in enumerate(iset.elements):
            for b in iset.elements[i:]:
                if a.twice + b.twice > 2 * cfg.bins:
                    raise ValueError(
                        f"pair {a}, {b} exceeds the click resolution N={cfg.bins}"
                    )


def _metadata(state, cfg, iset, **extra) -> dict:
    meta = {"state": state, "config": cfg, "set": iset.label}
    meta.update(extra)
    return meta


def count_matrix(state: StateSpec, cfg: DetectorConfig,
                 iset: IndexSet) -> WitnessReport:
    """Counting matrix C for the given model and index set.

    Entries are (k+l)! p_{k+l} for photocounts, c_{k+l} / C(N, k+l) for
    clicks, and the multinomial analog for intrinsic resolution; all are
    evaluated as direct expectations rather than through a distribution.
    """
    _check_counts_admissible(iset, cfg)
    labels = iset.elements
    rate, offset = cfg.gamma_rate, cfg.dark
    if cfg.model == PHOTOELECTRIC:
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return expect_any(state, NOExpr.monomial(1.0, s, 1.0, rate, offset))
    elif cfg.model == ONOFF:
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return povm_product_value(state, cfg, (cfg.bins - s, s))
    else:
        def entry(i, j):
            s = _pair_sum_multi(labels[i], labels[j])
            return povm_product_value(state, cfg, s)
    matrix = SymMatrix.build(len(labels), entry)
    return _report(matrix, labels, f"counts:{cfg.model}", _metadata(state, cfg, iset))


def moment_matrix(state: StateSpec, cfg: DetectorConfig,
                  iset: IndexSet) -> WitnessReport:
    """Moment matrix M: <:(eta n)^(k+l):>, <:pi^(k+l):>, or POVM products."""
    _check_moments_admissible(iset, cfg)
    labels = iset.elements
    if cfg.model == PHOTOELECTRIC:
        eta = cfg.efficiency

        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return expect_any(state, NOExpr.monomial(1.0, s, 0.0, eta, 0.0))
    elif cfg.model == ONOFF:
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return povm_product_value(state, cfg, (0, s))
    else:
        def entry(i, j):
            s = _pair_sum_multi(labels[i], labels[j])
            return povm_product_value(state, cfg, s)
    matrix = SymMatrix.build(len(labels), entry)
    return _report(matrix, labels, f"moments:{cfg.model}", _metadata(state, cfg, iset))


def count_matrix_from_counts(counts: CountDistribution,
                             iset: IndexSet) -> WitnessReport:
    """Counting matrix assembled from measured (or sampled) statistics."""
    cfg = counts.config
    _check_counts_admissible(iset, cfg)
    labels = iset.elements
    if counts.kind == "photo":
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return math.factorial(s) * counts.prob(s)
    elif counts.kind == "click":
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return counts.prob(s) / binom(cfg.bins, s)
    elif counts.kind == "pnr":
        def entry(i, j):
            s = _pair_sum_multi(labels[i], labels[j])
            return counts.prob(s) / multinom(cfg.bins, s)
    else:
        raise ValueError(f"unsupported distribution kind {counts.kind!r}")
    matrix = SymMatrix.build(len(labels), entry)
    meta = {"config": cfg, "set": iset.label, "empirical": True}
    return _report(matrix, labels, f"counts:{cfg.model}", meta)


def moment_matrix_from_counts(counts: CountDistribution,
                              iset: IndexSet) -> WitnessReport:
    """Moment matrix assembled from measured (or sampled) statistics."""
    cfg = counts.config
    _check_moments_admissible(iset, cfg)
    labels = iset.elements
    if counts.kind == "photo":
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return factorial_moment_from_counts(counts, s)
    elif counts.kind == "click":
        def entry(i, j):
            s = _pair_sum_scalar(labels[i], labels[j])
            return click_moment_from_counts(counts, s)
    elif counts.kind == "pnr":
        def entry(i, j):
            s = _pair_sum_multi(labels[i], labels[j])
            return pnr_moment_from_counts(counts, s)
    else:
        raise ValueError(f"unsupported distribution kind {counts.kind!r}")
    matrix = SymMatrix.build(len(labels), entry)
    meta = {"config": cfg, "set": iset.label, "empirical": True}
    return _report(matrix, labels, f"moments:{cfg.model}", meta)


# --------------------------------------------------------------------------
# scalar criteria for click statistics


@dataclass(frozen=True)
class KlyshkoResult:
    ratio: float
    bound: float
    verdict: str


def klyshko_ratio(counts: CountDistribution, variant: str) -> KlyshkoResult:
    """Click-count ratio tests against their classical bounds.

    integer variant: c_0 c_2 / c_1^2 >= (1/2)(1 - 1/N) for classical light;
    half variant:    c_1 c_3 / c_2^2 >= (2/3)(1 - 1/(N-1)).
    A vanishing denominator yields no verdict rather than a violation.
    """
    if counts.kind != "click":
        raise ValueError("klyshko_ratio needs a click distribution")
    bins = counts.config.bins
    if variant == INTEGER:
        if bins < 2:
            raise ValueError("integer variant needs N >= 2")
        bound = 0.5 * (1.0 - 1.0 / bins)
        denom = counts.prob(1) ** 2
        numer = counts.prob(0) * counts.prob(2)
    elif variant == HALF:
        if bins < 3:
            raise ValueError("half variant needs N >= 3")
        bound = (2.0 / 3.0) * (1.0 - 1.0 / (bins - 1))
        denom = counts.prob(2) ** 2
        numer = counts.prob(1) * counts.prob(3)
    else:
        raise ValueError(f"variant must be {INTEGER!r} or {HALF!r}")
    if denom == 0.0:
        return KlyshkoResult(math.nan, bound, INDETERMINATE)
    ratio = numer / denom
    verdict = NONCLASSICAL if bound - ratio > 1e-10 else NO_VIOLATION
    return KlyshkoResult(ratio, bound, verdict)


def g_functions(state: StateSpec, cfg: DetectorConfig, max_m: int) -> list[float]:
    """Normalized click-correlation functions g^(m) = <:pi^m:> / <:pi:>^m."""
    mean = click_moment(state, cfg, 1)
    if mean <= 0.0:
        raise ValueError("g functions need <:pi:> > 0 (state must trigger clicks)")
    return [click_moment(state, cfg, m) / mean ** m for m in range(1, max_m + 1)]


def g_matrix(report: WitnessReport) -> WitnessReport:
    """Rescale a click-moment matrix to correlation-function form.

    Congruence with the positive diagonal D = diag(<:pi:>^-m) maps entries
    to g^(k+l) without changing the signature, so positive semidefiniteness
    is preserved exactly.
    """
    if not report.source.startswith("moments:" + ONOFF):
        raise ValueError("g_matrix applies to on-off click-moment matrices")
    state = report.metadata.get("state")
    cfg = report.metadata.get("config")
    if state is None or cfg is None:
        raise ValueError("report metadata lacks the state/config echo")
    mean = click_moment(state, cfg, 1)
    if mean <= 0.0:
        raise ValueError("g_matrix needs <:pi:> > 0")
    scales = np.array([mean ** (-float(k)) for k in report.labels])
    scaled = SymMatrix(report.matrix.entries * np.outer(scales, scales))
    meta = dict(report.metadata)
    meta["g_scaled"] = True
    return _report(scaled, report.labels, report.source, meta)


@dataclass(frozen=True)
class ClickStats:
    """Mean, variance, skewness of a click distribution and the mapped moments.

    ``moments`` are (<:pi:>, <:pi^2:>, <:pi^3:>) reconstructed from the
    central statistics; they must agree with the direct weighted sums.
    ``skewness`` is NaN when the variance vanishes, and a mapped moment is
    NaN when the bin count cannot support it (N < 2 or N < 3).
    """

    mean: float
    variance: float
    skewness: float
    moments: tuple[float, float, float]


def _central_stats(counts: CountDistribution) -> tuple[float, float, float]:
    ks = np.array(counts.outcomes, dtype=float)
    ps = np.array(counts.probs)
    mean = float(np.sum(ks * ps))
    var = float(np.sum((ks - mean) ** 2 * ps))
    third = float(np.sum((ks - mean) ** 3 * ps))
    return mean, var, third


def click_stats(counts: CountDistribution) -> ClickStats:
    """Central statistics of the click number and the moment mapping.

    <:pi:>   = mu / N
    <:pi^2:> = (sigma^2 + mu^2 - mu) / (N (N-1))
    <:pi^3:> = (m3 + 3 mu sigma^2 + mu^3 - 3 (sigma^2 + mu^2) + 2 mu)
               / (N (N-1) (N-2)),  with m3 the third central moment.
    """
    if counts.kind != "click":
        raise ValueError("click_stats needs a click distribution")
    bins = counts.config.bins
    mean, var, third = _central_stats(counts)
    skew = third / var ** 1.5 if var > 0.0 else math.nan
    pi1 = mean / bins
    pi2 = math.nan
    pi3 = math.nan
    if bins >= 2:
        pi2 = (var + mean ** 2 - mean) / (bins * (bins - 1))
    if bins >= 3:
        pi3 = (third + 3 * mean * var + mean ** 3 - 3 * (var + mean ** 2) + 2 * mean) / (
            bins * (bins - 1) * (bins - 2)
        )
    return ClickStats(mean, var, skew, (pi1, pi2, pi3))


def qb_parameter(counts: CountDistribution) -> float:
    """Binomial Q parameter Q_B = N sigma^2 / [mu (N - mu)] - 1.

    Negative values certify sub-binomial, hence nonclassical, click
    statistics.  The 2x2 integer-set moment determinant equals
    mu (N - mu) / (N^2 (N-1)) * Q_B; the identity is verified here.
    """
    if counts.kind != "click":
        raise ValueError("qb_parameter needs a click distribution")
    bins = counts.config.bins
    mean, var, _ = _central_stats(counts)
    if not 0.0 < mean < bins:
        raise ValueError(f"Q_B needs 0 < mu < N, got mu={mean}")
    qb = bins * var / (mean * (bins - mean)) - 1.0
    if bins >= 2:
        pi1 = click_moment_from_counts(counts, 1)
        pi2 = click_moment_from_counts(counts, 2)
        det = pi2 - pi1 ** 2
        recast = mean * (bins - mean) / (bins ** 2 * (bins - 1)) * qb
        if abs(det - recast) > _IDENTITY_TOL * max(1.0, abs(det)):
            raise AssertionError(
                f"Q_B determinant identity violated: {det} vs {recast}"
            )
    return qb


def skewness_witness(counts: CountDistribution) -> float:
    """Half-integer-set determinant <:pi:><:pi^3:> - <:pi^2:>^2.

    Computed through two routes that must agree: products of the direct
    click moments, and the central-moment form
    <:pi:><:(d pi)^3:> + <:pi:>^2 <:(d pi)^2:> - <:(d pi)^2:>^2 with
    <:(d pi)^2:> = (N sigma^2 - mu mubar) / (N^2 (N-1)).  The latter handles
    sigma = 0 without a skewness division.  Zero for binomial clicks;
    negative values witness nonclassicality.
    """
    if counts.kind != "click":
        raise ValueError("skewness_witness needs a click distribution")
    bins = counts.config.bins
    if bins < 3:
        raise ValueError("skewness witness needs N >= 3")
    pi1 = click_moment_from_counts(counts, 1)
    pi2 = click_moment_from_counts(counts, 2)
    pi3 = click_moment_from_counts(counts, 3)
    direct = pi1 * pi3 - pi2 ** 2

    mean, var, third = _central_stats(counts)
    mubar = bins - mean
    d2 = (bins * var - mean * mubar) / (bins ** 2 * (bins - 1))
    d3 = (
        bins ** 2 * third
        + 2 * mean * mubar * (mubar - mean)
        - 3 * bins * var * (mubar - mean)
    ) / (bins ** 3 * (bins - 1) * (bins - 2))
    pi1_central = mean / bins
    central = pi1_central * d3 + pi1_central ** 2 * d2 - d2 ** 2
    if abs(direct - central) > _IDENTITY_TOL * max(1.0, abs(direct)):
        raise AssertionError(
            f"skewness witness routes disagree: {direct} vs {central}"
        )
    return direct
