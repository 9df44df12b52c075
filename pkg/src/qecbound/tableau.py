"""Stabilizer tableau simulation with symbolic measurement signs.

Standard Aaronson-Gottesman tableau (destabilizer + stabilizer rows over
x/z bitmasks) extended so that each row's sign is an affine GF(2)
expression: a constant bit plus an XOR of free random bits, one fresh bit
per nondeterministic measurement.  Measurement outcomes are therefore
affine expressions too, which lets a caller decide statically whether a
declared parity of outcomes is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

# Phase exponent of the single-qubit product A*B = i^phi * C, keyed by
# (xa, za, xb, zb).  Only non-identity/non-identity pairs contribute.
_PHASE = {
    (1, 0, 1, 1): 1,   # X*Y = iZ
    (1, 0, 0, 1): 3,   # X*Z = -iY
    (1, 1, 1, 0): 3,   # Y*X = -iZ
    (1, 1, 0, 1): 1,   # Y*Z = iX
    (0, 1, 1, 0): 1,   # Z*X = iY
    (0, 1, 1, 1): 3,   # Z*Y = -iX
}


@dataclass(frozen=True)
class SignExpr:
    """Affine GF(2) expression: constant bit XOR a set of free random bits."""

    const: int = 0
    sym: int = 0  # bitmask over free-bit ids

    def __xor__(self, other: "SignExpr") -> "SignExpr":
        return SignExpr(self.const ^ other.const, self.sym ^ other.sym)

    @property
    def deterministic(self) -> bool:
        return self.sym == 0


class _Row:
    __slots__ = ("x", "z", "r", "sym")

    def __init__(self, x: int = 0, z: int = 0, r: int = 0, sym: int = 0):
        self.x, self.z, self.r, self.sym = x, z, r, sym

    def copy(self) -> "_Row":
        return _Row(self.x, self.z, self.r, self.sym)


def _mult(a: _Row, b: _Row) -> _Row:
    """Product a*b of two Pauli rows.

    The phase is real whenever a and b commute (always true for
    stabilizer-row uses); for anticommuting destabilizer updates the sign
    is garbage but is never read.
    """
    phi = 2 * (a.r + b.r)
    overlap = (a.x | a.z) & (b.x | b.z)
    q = 0
    while overlap >> q:
        if (overlap >> q) & 1:
            key = ((a.x >> q) & 1, (a.z >> q) & 1, (b.x >> q) & 1, (b.z >> q) & 1)
            phi += _PHASE.get(key, 0)
        q += 1
    return _Row(a.x ^ b.x, a.z ^ b.z, ((phi % 4) >> 1) & 1, a.sym ^ b.sym)


class SymbolicTableau:
    """Tableau over ``n`` qubits, initial state |0...0>."""

    def __init__(self, n: int):
        self.n = n
        # rows[0:n] destabilizers (X_i), rows[n:2n] stabilizers (Z_i)
        self.rows = [_Row(x=1 << i) for i in range(n)] + [_Row(z=1 << i) for i in range(n)]
        self._next_free_bit = 0

    # -- gates ---------------------------------------------------------

    def h(self, q: int) -> None:
        bit = 1 << q
        for row in self.rows:
            xq, zq = row.x & bit, row.z & bit
            if xq and zq:
                row.r ^= 1
            row.x = (row.x & ~bit) | (zq and bit)
            row.z = (row.z & ~bit) | (xq and bit)

    def s(self, q: int) -> None:
        bit = 1 << q
        for row in self.rows:
            if row.x & bit:
                if row.z & bit:
                    row.r ^= 1
                row.z ^= bit

    def sdg(self, q: int) -> None:
        bit = 1 << q
        for row in self.rows:
            if row.x & bit:
                if not row.z & bit:
                    row.r ^= 1
                row.z ^= bit

    def x(self, q: int) -> None:
        bit = 1 << q
        for row in self.rows:
            if row.z & bit:
                row.r ^= 1

    def y(self, q: int) -> None:
        bit = 1 << q
        for row in self.rows:
            if bool(row.x & bit) ^ bool(row.z & bit):
                row.r ^= 1

    def z(self, q: int) -> None:
        bit = 1 << q
        for row in self.rows:
            if row.x & bit:
                row.r ^= 1

    def cx(self, c: int, t: int) -> None:
        cb, tb = 1 << c, 1 << t
        for row in self.rows:
            xc, zc = bool(row.x & cb), bool(row.z & cb)
            xt, zt = bool(row.x & tb), bool(row.z & tb)
            if xc and zt and not (xt ^ zc):
                row.r ^= 1
            if xc:
                row.x ^= tb
            if zt:
                row.z ^= cb

    def cz(self, c: int, t: int) -> None:
        self.h(t)
        self.cx(c, t)
        self.h(t)

    # -- measurement and reset ----------------------------------------

    def measure(self, q: int) -> SignExpr:
        """Measure qubit q in the Z basis; returns the outcome expression."""
        bit = 1 << q
        n = self.n
        pivot = next((i for i in range(n, 2 * n) if self.rows[i].x & bit), None)
        if pivot is None:
            # Deterministic: multiply the stabilizers flagged by destabilizers.
            acc = _Row()
            for i in range(n):
                if self.rows[i].x & bit:
                    acc = _mult(acc, self.rows[i + n])
            return SignExpr(acc.r, acc.sym)
        # Random outcome: introduce a fresh free bit.
        free = 1 << self._next_free_bit
        self._next_free_bit += 1
        prow = self.rows[pivot].copy()
        for i, row in enumerate(self.rows):
            if i != pivot and row.x & bit:
                self.rows[i] = _mult(row, prow)
        self.rows[pivot - n] = prow
        self.rows[pivot] = _Row(z=bit, sym=free)
        return SignExpr(0, free)

    def reset(self, q: int) -> None:
        """Force qubit q to |0> (measure, then flip conditioned on outcome)."""
        expr = self.measure(q)
        bit = 1 << q
        for row in self.rows:
            if row.z & bit:
                row.r ^= expr.const
                row.sym ^= expr.sym

    # -- debug invariants ---------------------------------------------

    def validate(self) -> None:
        """Check stabilizer generators are independent and commuting."""
        n = self.n
        stabs = self.rows[n:]
        for i in range(n):
            for j in range(i + 1, n):
                a, b = stabs[i], stabs[j]
                if (bin(a.x & b.z).count("1") + bin(a.z & b.x).count("1")) % 2:
                    raise AssertionError(f"stabilizers {i},{j} anticommute")
        # Independence: the 2n-bit (x|z) vectors must have full GF(2) rank.
        basis: list[int] = []
        for row in stabs:
            v = row.x | (row.z << n)
            for b in basis:
                v = min(v, v ^ b)
            if v == 0:
                raise AssertionError("dependent stabilizer generators")
            basis.append(v)
