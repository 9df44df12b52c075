"""Error bitstrings and enumeration of the error space.

Bitstrings are plain ints with bit ``i`` selecting channel ``i``; textual
renderings put bit 0 leftmost.  The base enumeration order is ascending
Hamming weight, with ties broken by lexicographic order of the ascending
support tuples (combinatorial number system ranks), which gives O(1) rank
arithmetic for worker striding and membership tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .compiler import DetectorErrorModel


def bits_to_str(mask: int, n: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def str_to_bits(s: str) -> int:
    mask = 0
    for i, c in enumerate(s):
        if c == "1":
            mask |= 1 << i
    return mask


def weight(mask: int) -> int:
    return mask.bit_count()


def support(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def rank_in_weight_class(mask: int, n: int) -> int:
    """Position of `mask` among same-weight strings, lex order of supports."""
    supp = support(mask)
    k = len(supp)
    r = 0
    prev = -1
    for j, c in enumerate(supp):
        for a in range(prev + 1, c):
            r += comb(n - 1 - a, k - 1 - j)
        prev = c
    return r


def unrank_in_weight_class(r: int, n: int, k: int) -> int:
    """Inverse of rank_in_weight_class for weight-k strings."""
    mask = 0
    c = 0
    for j in range(k):
        while True:
            cnt = comb(n - 1 - c, k - 1 - j)
            if r < cnt:
                break
            r -= cnt
            c += 1
        mask |= 1 << c
        c += 1
    return mask


def position_of(mask: int, n: int) -> int:
    """Global position in the weight order over all 2^n strings."""
    w = weight(mask)
    return sum(comb(n, j) for j in range(w)) + rank_in_weight_class(mask, n)


def unrank_position(pos: int, n: int) -> int:
    w = 0
    while True:
        c = comb(n, w)
        if pos < c:
            return unrank_in_weight_class(pos, n, w)
        pos -= c
        w += 1


def first_position_of_weight(w: int, n: int) -> int:
    return sum(comb(n, j) for j in range(w))


@dataclass
class WeightOrderCursor:
    """Strided cursor over the weight order; yields each assigned position once."""

    n: int
    position: int = 0
    stride: int = 1

    @property
    def exhausted(self) -> bool:
        return self.position >= (1 << self.n)

    def next(self) -> int:
        if self.exhausted:
            raise StopIteration("cursor exhausted")
        mask = unrank_position(self.position, self.n)
        self.position += self.stride
        return mask


@dataclass(frozen=True)
class EnumerationPlan:
    strategy: str = "hamming"  # hamming | split | local-flip | local-shift | local-both
    worker_count: int = 1
    distance_ansatz: int | None = None  # required for split

    @property
    def local_moves(self) -> tuple[str, ...]:
        return {
            "local-flip": ("flip",),
            "local-shift": ("shift",),
            "local-both": ("flip", "shift"),
        }.get(self.strategy, ())


def partition_workers(plan: EnumerationPlan, n: int) -> list[WeightOrderCursor]:
    """Build one strided cursor per worker.

    hamming: worker i takes order positions congruent to i mod k.  split:
    the first ceil(k/2) workers stride from position 0 and the rest from
    the first position of weight floor(d/2)+1; the low block eventually
    reaches the high start, so the driver deduplicates via the VisitedSet.
    """
    k = plan.worker_count
    if k < 1:
        raise ValueError("worker_count must be >= 1")
    if plan.strategy != "split":
        return [WeightOrderCursor(n, position=i, stride=k) for i in range(k)]
    if plan.distance_ansatz is None:
        raise ValueError("split strategy requires a distance ansatz")
    k_low = (k + 1) // 2
    k_high = k - k_low
    cursors = [WeightOrderCursor(n, position=i, stride=k_low) for i in range(k_low)]
    if k_high:
        start = first_position_of_weight(plan.distance_ansatz // 2 + 1, n)
        cursors += [
            WeightOrderCursor(n, position=start + i, stride=k_high) for i in range(k_high)
        ]
    return cursors


def local_moves_flip(mask: int, n: int) -> set[int]:
    """All strings at Hamming distance 1."""
    return {mask ^ (1 << i) for i in range(n)}


def local_moves_shift(mask: int, n: int) -> set[int]:
    """All nontrivial circular shifts, duplicates collapsed."""
    out = set()
    full = (1 << n) - 1
    m = mask
    for _ in range(n - 1):
        m = ((m << 1) | (m >> (n - 1))) & full
        if m != mask:
            out.add(m)
    return out


@dataclass
class VisitedSet:
    """Membership structure for enumerated bitstrings.

    All strings of weight < complete_weight are members, plus weight-class
    strings below frontier_rank, plus an explicit extras set for
    out-of-order visits.  Extras are promoted into the frontier as the
    in-order prefix catches up, so extras never duplicate the prefix.
    """

    n: int
    complete_weight: int = 0
    frontier_rank: int = 0
    extras: set[int] = field(default_factory=set)

    def __contains__(self, mask: int) -> bool:
        w = weight(mask)
        if w < self.complete_weight:
            return True
        if w == self.complete_weight and rank_in_weight_class(mask, self.n) < self.frontier_rank:
            return True
        return mask in self.extras

    def _frontier_mask(self) -> int | None:
        if self.complete_weight > self.n:
            return None
        return unrank_in_weight_class(self.frontier_rank, self.n, self.complete_weight)

    def _advance(self) -> None:
        self.frontier_rank += 1
        while self.complete_weight <= self.n and self.frontier_rank >= comb(
            self.n, self.complete_weight
        ):
            self.frontier_rank = 0
            self.complete_weight += 1

    def add(self, mask: int) -> None:
        if mask in self:
            raise ValueError(f"bitstring {bits_to_str(mask, self.n)} visited twice")
        if self.complete_weight <= self.n and mask == self._frontier_mask():
            self._advance()
            # promote any extras that now sit on the frontier
            while self.complete_weight <= self.n:
                fm = self._frontier_mask()
                if fm in self.extras:
                    self.extras.discard(fm)
                    self._advance()
                else:
                    break
        else:
            self.extras.add(mask)

    @property
    def covers_all(self) -> bool:
        return self.complete_weight > self.n

    @property
    def count(self) -> int:
        prefix = first_position_of_weight(self.complete_weight, self.n) if not self.covers_all else 1 << self.n
        return prefix + self.frontier_rank + len(self.extras)


def syndrome_of(model: DetectorErrorModel, mask: int) -> int:
    """XOR of detector footprints over the channels set in `mask`."""
    if mask >> model.n_channels:
        raise ValueError("bitstring length exceeds channel count")
    s = 0
    m = mask
    while m:
        i = (m & -m).bit_length() - 1
        s ^= model.det_footprints[i]
        m &= m - 1
    return s


def observable_of(model: DetectorErrorModel, mask: int) -> int:
    """XOR of observable footprints over the channels set in `mask`."""
    if mask >> model.n_channels:
        raise ValueError("bitstring length exceeds channel count")
    o = 0
    m = mask
    while m:
        i = (m & -m).bit_length() - 1
        o ^= model.obs_footprints[i]
        m &= m - 1
    return o
