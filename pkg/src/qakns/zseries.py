"""Matrix-valued truncated Laurent series in the spectral variable z.

Terms are stored as a map from z-degree to a square MatSeries. `zvalid`
is the lowest degree at which stored coefficients are guaranteed exact:
degrees below it are unknown (typically the discarded tail of an inverse
or of a solved series), degrees above the stored support are exactly
zero. A fully exact object (finite support, nothing discarded) has
zvalid = -infinity.

Multiplication propagates the bound: a product is exact at degree d once
no unknown coefficient of either factor can reach d, which gives
    zvalid = max(a.zvalid + top(b), b.zvalid + top(a)).
"""

from __future__ import annotations

import math

from .matseries import MatSeries

NEG_INF = -math.inf


class InsufficientDepthError(ValueError):
    """An assertion window reaches below the exactly-known z-degrees."""


class MZSeries:
    __slots__ = ("n", "terms", "zvalid", "proto")

    def __init__(self, n: int, terms: dict, zvalid=NEG_INF, proto=None):
        self.n = n
        kept = {}
        for d, m in terms.items():
            if m.n != n:
                raise ValueError("dimension mismatch")
            if proto is None:
                proto = m.proto()
            # keep inexact zeros: they still bound what later checks may claim
            if d >= zvalid and not m.is_zero_exact():
                kept[d] = m
        self.terms = kept
        self.zvalid = zvalid
        self.proto = proto

    # -- constructors ----------------------------------------------------

    @staticmethod
    def from_term(n: int, degree: int, mat: MatSeries) -> "MZSeries":
        return MZSeries(n, {degree: mat})

    @staticmethod
    def identity(n: int, proto) -> "MZSeries":
        return MZSeries(n, {0: MatSeries.identity(n, proto)})

    @staticmethod
    def zero(n: int, proto=None) -> "MZSeries":
        return MZSeries(n, {}, proto=proto)

    # -- structure ---------------------------------------------------------

    def top(self) -> int | float:
        """Highest degree that may carry a nonzero coefficient."""
        if self.terms:
            return max(self.terms)
        return self.zvalid if self.zvalid != NEG_INF else NEG_INF

    def bottom(self) -> int | float:
        if self.terms:
            return min(self.terms)
        return self.zvalid

    @property
    def is_exact(self) -> bool:
        return self.zvalid == NEG_INF

    def _zero_mat(self) -> MatSeries:
        if self.proto is None:
            raise ValueError("series carries no coefficient prototype")
        return MatSeries.zero(self.n, self.proto)

    def coeff(self, d: int) -> MatSeries:
        """Coefficient at degree d; raises when the degree is not known exactly."""
        if d < self.zvalid:
            raise InsufficientDepthError(f"z**{d} coefficient not determined")
        got = self.terms.get(d)
        return got if got is not None else self._zero_mat()

    def is_zero(self) -> bool:
        """All exactly-known coefficients vanish (to their own x/t validity)."""
        return all(m.is_zero() for m in self.terms.values())

    def is_zero_exact(self) -> bool:
        """Exactly zero with nothing hidden beyond any validity bound."""
        return self.is_exact and all(
            m.is_zero_exact() for m in self.terms.values()
        )

    def min_entry_valid(self):
        vals = [m.min_valid() for m in self.terms.values()]
        return min(vals) if vals else math.inf

    def first_nonzero(self):
        """(z-degree, i, j, witness) of the first surviving coefficient."""
        for d in sorted(self.terms):
            hit = self.terms[d].first_nonzero()
            if hit is not None:
                i, j, w = hit
                return d, i, j, w
        return None

    def map_entries(self, fn) -> "MZSeries":
        proto = fn(self.proto) if self.proto is not None else None
        return MZSeries(
            self.n, {d: m.map(fn) for d, m in self.terms.items()}, self.zvalid, proto
        )

    def transpose(self) -> "MZSeries":
        return MZSeries(
            self.n,
            {d: m.transpose() for d, m in self.terms.items()},
            self.zvalid,
            self.proto,
        )

    # -- arithmetic -----------------------------------------------------------

    def _merge(self, other: "MZSeries", sign: int) -> "MZSeries":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        zv = max(self.zvalid, other.zvalid)
        out = dict(self.terms)
        for d, m in other.terms.items():
            cur = out.get(d)
            add = m if sign > 0 else -m
            out[d] = add if cur is None else cur + add
        return MZSeries(self.n, out, zv, self.proto or other.proto)

    def __add__(self, other: "MZSeries") -> "MZSeries":
        return self._merge(other, +1)

    def __sub__(self, other: "MZSeries") -> "MZSeries":
        return self._merge(other, -1)

    def __neg__(self) -> "MZSeries":
        return MZSeries(
            self.n, {d: -m for d, m in self.terms.items()}, self.zvalid, self.proto
        )

    def __mul__(self, other: "MZSeries") -> "MZSeries":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        out: dict[int, MatSeries] = {}
        for da, ma in self.terms.items():
            for db, mb in other.terms.items():
                d = da + db
                prod = ma @ mb
                cur = out.get(d)
                out[d] = prod if cur is None else cur + prod
        zv = NEG_INF
        if not self.is_exact:
            t = other.top()
            if t != NEG_INF:
                zv = max(zv, self.zvalid + t)
            if not other.is_exact:
                zv = max(zv, self.zvalid + other.zvalid)
        if not other.is_exact:
            t = self.top()
            if t != NEG_INF:
                zv = max(zv, other.zvalid + t)
        return MZSeries(self.n, out, zv, self.proto or other.proto)

    def scale(self, c) -> "MZSeries":
        return MZSeries(
            self.n,
            {d: m.scale(c) for d, m in self.terms.items()},
            self.zvalid,
            self.proto,
        )

    def scale_entry(self, e) -> "MZSeries":
        """Multiply every matrix entry by a fixed ring element on the right."""
        return self.map_entries(lambda s: s * e)

    def shift(self, k: int) -> "MZSeries":
        """Multiply by z**k."""
        zv = self.zvalid if self.zvalid == NEG_INF else self.zvalid + k
        return MZSeries(
            self.n, {d + k: m for d, m in self.terms.items()}, zv, self.proto
        )

    def truncate_below(self, floor: int) -> "MZSeries":
        """Forget degrees below `floor` (the forgotten part becomes unknown)."""
        if self.is_exact and (not self.terms or min(self.terms) >= floor):
            return self
        return MZSeries(self.n, self.terms, max(self.zvalid, floor), self.proto)

    # -- projections and residue ----------------------------------------------

    def project(self, sign: str) -> "MZSeries":
        """Keep degrees >= 0 ("plus") or < 0 ("minus")."""
        if sign == "plus":
            if self.zvalid > 0:
                raise InsufficientDepthError("nonnegative part not fully determined")
            kept = {d: m for d, m in self.terms.items() if d >= 0}
            # the discarded part is zero by definition: the result is exact
            return MZSeries(self.n, kept, proto=self.proto)
        if sign == "minus":
            kept = {d: m for d, m in self.terms.items() if d < 0}
            return MZSeries(self.n, kept, self.zvalid, self.proto)
        raise ValueError("sign must be 'plus' or 'minus'")

    def residue(self) -> MatSeries:
        """The coefficient of z**-1; requires it to be exactly known."""
        return self.coeff(-1)

    # -- inversion ----------------------------------------------------------------

    def invert(self, floor: int) -> "MZSeries":
        """Inverse of I + (strictly negative degrees), kept down to z**floor."""
        proto = self.proto
        ident = self.terms.get(0)
        if ident is None or not (ident - MatSeries.identity(self.n, proto)).is_zero():
            raise ValueError("leading term is not the identity")
        if self.terms and max(self.terms) > 0:
            raise ValueError("positive degrees present")
        step = -MZSeries(
            self.n, {d: m for d, m in self.terms.items() if d < 0},
            self.zvalid, proto,
        )
        acc = MZSeries.identity(self.n, proto)
        term = MZSeries.identity(self.n, proto)
        lost = False
        for _ in range(max(0, -floor)):
            term = (term * step).truncate_below(floor)
            if term.is_zero_exact():
                break
            acc = acc + term
        else:
            # loop exhausted: account for the uncomputed remainder of the tail
            term = (term * step).truncate_below(floor)
            if not term.is_zero_exact():
                lost = True
        zv = max(acc.zvalid, self.zvalid, floor if lost else NEG_INF)
        return MZSeries(self.n, acc.terms, zv, proto)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MZSeries)
            and self.n == other.n
            and self.terms == other.terms
            and self.zvalid == other.zvalid
        )

    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            body = " + ".join(f"z^{d}*{m!r}" for d, m in sorted(self.terms.items()))
        mark = "" if self.is_exact else f" (unknown below z^{self.zvalid})"
        return f"MZ[{body}{mark}]"


def z_mul(a: MZSeries, b: MZSeries) -> MZSeries:
    return a * b


def z_invert(s: MZSeries, floor: int) -> MZSeries:
    return s.invert(floor)


def z_project(s: MZSeries, sign: str) -> MZSeries:
    return s.project(sign)


def z_residue(s: MZSeries) -> MatSeries:
    return s.residue()
