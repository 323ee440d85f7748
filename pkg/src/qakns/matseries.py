"""Square matrices over a coefficient ring (x-series or time polynomials).

Entries only need the ring protocol: +, -, unary -, *, is_zero(),
zero_like(), one_like(). Matrices are immutable; every operation returns
a fresh object.
"""

from __future__ import annotations

from .scalars import frac
from .series import XSeries


class MatSeries:
    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(r) for r in rows)
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ValueError("matrix must be square")

    # -- constructors --------------------------------------------------

    @staticmethod
    def zero(n: int, proto) -> "MatSeries":
        z = proto.zero_like()
        return MatSeries([[z] * n for _ in range(n)])

    @staticmethod
    def identity(n: int, proto) -> "MatSeries":
        z, o = proto.zero_like(), proto.one_like()
        return MatSeries([[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def diag_const(values, order: int) -> "MatSeries":
        """Diagonal matrix of rational constants over x-series entries."""
        vs = [frac(v) for v in values]
        n = len(vs)
        z = XSeries.zero(order)
        return MatSeries(
            [[XSeries.const(vs[i], order) if i == j else z for j in range(n)]
             for i in range(n)]
        )

    @staticmethod
    def unit(n: int, alpha: int, proto) -> "MatSeries":
        """The projector with a single 1 at position (alpha, alpha)."""
        z, o = proto.zero_like(), proto.one_like()
        return MatSeries(
            [[o if i == j == alpha else z for j in range(n)] for i in range(n)]
        )

    @staticmethod
    def from_scalars(rows, order: int) -> "MatSeries":
        return MatSeries([[XSeries.const(frac(c), order) for c in r] for r in rows])

    # -- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def proto(self):
        return self.rows[0][0]

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.rows for e in r)

    def is_zero_exact(self) -> bool:
        """Exactly the zero matrix, with nothing hidden beyond validity."""
        return all(e.is_zero() and e.is_exact for r in self.rows for e in r)

    def map(self, fn) -> "MatSeries":
        return MatSeries([[fn(e) for e in r] for r in self.rows])

    def transpose(self) -> "MatSeries":
        n = self.n
        return MatSeries([[self.rows[j][i] for j in range(n)] for i in range(n)])

    def diagonal(self):
        return [self.rows[i][i] for i in range(self.n)]

    def min_valid(self) -> int | float:
        """Smallest validity bound over entries (x-order for series entries)."""
        return min(e.valid for r in self.rows for e in r)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "MatSeries") -> "MatSeries":
        return MatSeries(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        )

    def __sub__(self, other: "MatSeries") -> "MatSeries":
        return MatSeries(
            [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        )

    def __neg__(self) -> "MatSeries":
        return MatSeries([[-a for a in r] for r in self.rows])

    def __matmul__(self, other: "MatSeries") -> "MatSeries":
        n = self.n
        if other.n != n:
            raise ValueError("dimension mismatch")
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = None
                for k in range(n):
                    term = self.rows[i][k] * other.rows[k][j]
                    acc = term if acc is None else acc + term
                row.append(acc)
            out.append(row)
        return MatSeries(out)

    def scale(self, c) -> "MatSeries":
        c = frac(c)
        return self.map(lambda e: e.scale(c))

    def first_nonzero(self):
        """First (i, j, witness) inside validity, or None if zero."""
        for i, r in enumerate(self.rows):
            for j, e in enumerate(r):
                if not e.is_zero():
                    return i, j, e.first_nonzero()
        return None

    def __eq__(self, other) -> bool:
        return isinstance(other, MatSeries) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "MatSeries(" + "; ".join(
            ", ".join(repr(e) for e in r) for r in self.rows
        ) + ")"
