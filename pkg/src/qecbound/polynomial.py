"""Error minterms, bound accumulators, and box optimization.

A minterm for bitstring e is prod_{e_i=1} x_i * prod_{e_i=0} (1-x_i); an
error polynomial is a sum of minterms.  This module evaluates minterms at
a point, accumulates running lower/upper bounds on the logical error rate
with compensated summation, and optimizes polynomials exactly over
hyperrectangles by partial-derivative pruning with matching-term
simplification, followed by exhaustive vertex search over the surviving
free variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Absolute floating-point soundness margin applied to reported bounds.
FP_MARGIN = 1e-12

# Default cap on the exhaustive phase: up to 2^F_MAX vertex evaluations.
F_MAX_DEFAULT = 24

_VERTEX_CHUNK = 1 << 16


class _KahanSum:
    """Compensated accumulator."""

    __slots__ = ("total", "_c")

    def __init__(self) -> None:
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


@dataclass(frozen=True)
class Hyperrectangle:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ValueError("bound vectors differ in length")
        for lo, hi in zip(self.lower, self.upper):
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"invalid interval [{lo}, {hi}]")

    @property
    def n(self) -> int:
        return len(self.lower)

    @staticmethod
    def point(v) -> "Hyperrectangle":
        v = tuple(float(x) for x in v)
        return Hyperrectangle(v, v)

    @staticmethod
    def scaled(v, lo_scale: float, hi_scale: float) -> "Hyperrectangle":
        """Multiplicative box around a nominal point, clipped to [0, 1]."""
        lo = tuple(max(0.0, x * lo_scale) for x in v)
        hi = tuple(min(1.0, x * hi_scale) for x in v)
        return Hyperrectangle(lo, hi)


class MintermEvaluator:
    """Evaluates minterms at a fixed point v in (0,1)^n.

    Uses the factored form base * prod_{e_i=1} v_i/(1-v_i) with the
    all-zeros base precomputed once, so a single evaluation costs
    O(weight(e)).
    """

    def __init__(self, v) -> None:
        self.v = tuple(float(x) for x in v)
        for x in self.v:
            if not 0.0 < x < 1.0:
                raise ValueError(f"error rate {x} outside (0, 1)")
        b = 1.0
        for x in self.v:
            b *= 1.0 - x
        self.base = b
        self.ratio = tuple(x / (1.0 - x) for x in self.v)

    def __call__(self, mask: int) -> float:
        r = self.base
        m = mask
        while m:
            i = (m & -m).bit_length() - 1
            r *= self.ratio[i]
            m &= m - 1
        return r


def minterm_eval(mask: int, v) -> float:
    """Probability of the bitstring `mask` under channel rates `v`."""
    return MintermEvaluator(v)(mask)


@dataclass
class BoundAccumulators:
    """Running sums over enumerated bitstrings (Kahan-compensated)."""

    sum_l: _KahanSum = field(default_factory=_KahanSum)
    sum_s: _KahanSum = field(default_factory=_KahanSum)
    count_l: int = 0
    count_s: int = 0

    def accumulate(self, mask: int, is_logical_error: bool, evaluator: MintermEvaluator) -> None:
        p = evaluator(mask)
        self.sum_s.add(p)
        self.count_s += 1
        if is_logical_error:
            self.sum_l.add(p)
            self.count_l += 1


def accuracy_bounds(acc: BoundAccumulators) -> tuple[float, float]:
    """Sound sandwich: sum_L <= true rate <= 1 - (sum_S - sum_L)."""
    return acc.sum_l.total, 1.0 - (acc.sum_s.total - acc.sum_l.total)


# ---------------------------------------------------------------------------
# Signed terms and box optimization
# ---------------------------------------------------------------------------

POS, NEG = 1, -1


@dataclass(frozen=True)
class SignedTerm:
    """coefficient * prod of literals, literal = x_i (POS) or 1-x_i (NEG)."""

    coefficient: float
    literals: tuple[tuple[int, int], ...]  # sorted (variable, polarity)

    @staticmethod
    def make(coefficient: float, literals) -> "SignedTerm":
        return SignedTerm(coefficient, tuple(sorted(literals)))


def minterm_term(mask: int, n: int) -> SignedTerm:
    lits = [(i, POS if mask >> i & 1 else NEG) for i in range(n)]
    return SignedTerm(1.0, tuple(lits))


def terms_from_bitstrings(masks, n: int) -> list[SignedTerm]:
    return [minterm_term(m, n) for m in masks]


def evaluate_terms(terms, point) -> float:
    total = _KahanSum()
    for t in terms:
        val = t.coefficient
        for var, pol in t.literals:
            val *= point[var] if pol == POS else 1.0 - point[var]
        total.add(val)
    return total.total


def _merge_terms(terms) -> list[SignedTerm]:
    by_lits: dict[tuple, float] = {}
    for t in terms:
        by_lits[t.literals] = by_lits.get(t.literals, 0.0) + t.coefficient
    return [SignedTerm(c, lits) for lits, c in by_lits.items() if c != 0.0]


def bound_terms_individually(terms, box: Hyperrectangle) -> tuple[float, float]:
    """Sound interval for the sum over the box: sum of per-term extrema."""
    lo_sum = _KahanSum()
    hi_sum = _KahanSum()
    for t in terms:
        prod_max = 1.0
        prod_min = 1.0
        for var, pol in t.literals:
            if pol == POS:
                fmax, fmin = box.upper[var], box.lower[var]
            else:
                fmax, fmin = 1.0 - box.lower[var], 1.0 - box.upper[var]
            prod_max *= fmax
            prod_min *= fmin
        if t.coefficient >= 0.0:
            lo_sum.add(t.coefficient * prod_min)
            hi_sum.add(t.coefficient * prod_max)
        else:
            lo_sum.add(t.coefficient * prod_max)
            hi_sum.add(t.coefficient * prod_min)
    return lo_sum.total, hi_sum.total


def partial_derivative_simplified(terms, var: int) -> list[SignedTerm]:
    """d/dx_var with matching-term cancellation.

    Every input term must contain `var`.  A POS literal contributes
    +coefficient, a NEG literal -coefficient, with the literal removed;
    terms with identical remaining literal maps merge exactly (matching
    minterm pairs have identical magnitudes, so cancellation is exact).
    """
    out = []
    for t in terms:
        pol = dict(t.literals).get(var)
        if pol is None:
            raise ValueError(f"term lacks variable {var}")
        coeff = t.coefficient if pol == POS else -t.coefficient
        lits = tuple(l for l in t.literals if l[0] != var)
        out.append(SignedTerm(coeff, lits))
    return _merge_terms(out)


def _substitute(terms, var: int, value: float) -> list[SignedTerm]:
    out = []
    for t in terms:
        pol = dict(t.literals).get(var)
        if pol is None:
            out.append(t)
            continue
        factor = value if pol == POS else 1.0 - value
        lits = tuple(l for l in t.literals if l[0] != var)
        out.append(SignedTerm(t.coefficient * factor, lits))
    return _merge_terms(out)


def _eval_vertices(terms, box: Hyperrectangle, free: list[int]) -> np.ndarray:
    """Values at all 2^len(free) vertices (free vars at box corners)."""
    f = len(free)
    col = {v: j for j, v in enumerate(free)}
    total = np.zeros(1 << f)
    for start in range(0, 1 << f, _VERTEX_CHUNK):
        idx = np.arange(start, min(start + _VERTEX_CHUNK, 1 << f))
        chunk = np.zeros(idx.size)
        for t in terms:
            val = np.full(idx.size, t.coefficient)
            for var, pol in t.literals:
                bit = (idx >> col[var]) & 1
                x = np.where(bit, box.upper[var], box.lower[var])
                val *= x if pol == POS else 1.0 - x
            chunk += val
        total[start : start + idx.size] = chunk
    return total


@dataclass(frozen=True)
class OptimizationResult:
    vertex: tuple[float, ...]
    value: float
    exact: bool


def _optimize(terms, box: Hyperrectangle, sense: int, f_max: int) -> OptimizationResult:
    """sense=+1 maximizes, sense=-1 minimizes."""
    n = box.n
    terms = _merge_terms(terms)
    fixed: dict[int, float] = {}
    # Repeat the pruning sweep while it makes progress: substitutions can
    # unlock further sign certificates.
    progress = True
    while progress:
        progress = False
        present = set()
        for t in terms:
            present.update(v for v, _ in t.literals)
        for i in sorted(present):
            if i in fixed:
                continue
            dterms = partial_derivative_simplified(
                [t for t in terms if any(v == i for v, _ in t.literals)], i
            )
            lo, hi = bound_terms_individually(dterms, box)
            if lo > 0.0:
                choice = box.upper[i] if sense > 0 else box.lower[i]
            elif hi < 0.0:
                choice = box.lower[i] if sense > 0 else box.upper[i]
            else:
                continue
            fixed[i] = choice
            terms = _substitute(terms, i, choice)
            progress = True

    free = sorted({v for t in terms for v, _ in t.literals})
    exact = True
    if free:
        if len(free) <= f_max:
            vals = _eval_vertices(terms, box, free)
            best = int(np.argmax(vals) if sense > 0 else np.argmin(vals))
            value = float(vals[best])
            for j, var in enumerate(free):
                fixed[var] = box.upper[var] if (best >> j) & 1 else box.lower[var]
        else:
            # Sound fallback: a feasible vertex gives an under-estimate of
            # the max (over-estimate of the min).
            exact = False
            for var in free:
                fixed[var] = box.upper[var] if sense > 0 else box.lower[var]
            point = [fixed.get(i, box.lower[i]) for i in range(n)]
            value = evaluate_terms(terms, point)
    else:
        value = sum(t.coefficient for t in terms) if terms else 0.0

    vertex = tuple(fixed.get(i, box.lower[i]) for i in range(n))
    if not free:
        value = evaluate_terms(terms, vertex) if terms else 0.0
    return OptimizationResult(vertex, value, exact)


def maximize(terms, box: Hyperrectangle, f_max: int = F_MAX_DEFAULT) -> OptimizationResult:
    """Exact box maximum of a sum of signed terms (multilinear)."""
    return _optimize(terms, box, +1, f_max)


def minimize(terms, box: Hyperrectangle, f_max: int = F_MAX_DEFAULT) -> OptimizationResult:
    """Exact box minimum of a sum of signed terms (multilinear)."""
    return _optimize(terms, box, -1, f_max)


@dataclass(frozen=True)
class RobustnessBounds:
    lower: float
    upper: float
    lower_exact: bool
    upper_exact: bool
    witness_vertex: tuple[float, ...]


def robustness_bounds(l_terms, s_not_l_terms, box: Hyperrectangle,
                      f_max: int = F_MAX_DEFAULT) -> RobustnessBounds:
    """Sound bounds on the worst-case rate over the box:
    max p_{L&S} <= max p_L <= 1 - min p_{S\\L}."""
    lo = maximize(l_terms, box, f_max)
    hi = minimize(s_not_l_terms, box, f_max)
    return RobustnessBounds(lo.value, 1.0 - hi.value, lo.exact, hi.exact, lo.vertex)
