"""Sign-pattern extraction and the combinatorial sign-status checkers.

Two distinct obstructions are handled by two deliberately separate
operations:

* ``hermitian_square_status`` decides which entries of A A^t carry a
  constant sign; there an entry is ambiguous whenever two columns hit the
  row pair with agreeing signs in one column and opposing signs in the
  other, so BOTH 2x2 patterns (one plus with three minuses, and one minus
  with three pluses) matter.

* ``jacobian_sign_status`` and ``find_bad_submatrices`` concern the
  Jacobian S v'(x) of a reaction-form system with monotone nondecreasing
  fluxes; only the one-plus-three-minuses pattern obstructs a sign there.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Sequence, Tuple

from .model import Network, RationalMatrix, stoichiometric_matrix, validate_reaction_form


class Sign(Enum):
    PLUS = "+"
    MINUS = "-"
    ZERO = "0"

    @classmethod
    def of(cls, value) -> "Sign":
        if value > 0:
            return cls.PLUS
        if value < 0:
            return cls.MINUS
        return cls.ZERO

    @property
    def symbol(self) -> str:
        return self.value


class Status(Enum):
    PLUS = "+"
    MINUS = "-"
    ZERO = "0"
    AMBIGUOUS = "?"

    @property
    def symbol(self) -> str:
        return self.value


SignMatrix = Tuple[Tuple[Sign, ...], ...]


@dataclass(frozen=True)
class SignStatusMatrix:
    """Per-entry sign statuses of a derived matrix (A A^t or a Jacobian)."""

    entries: Tuple[Tuple[Status, ...], ...]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def ambiguous_entries(self) -> List[Tuple[int, int]]:
        return [
            (i, j)
            for i, row in enumerate(self.entries)
            for j, status in enumerate(row)
            if status is Status.AMBIGUOUS
        ]

    def symbols(self) -> List[List[str]]:
        return [[status.symbol for status in row] for row in self.entries]


@dataclass(frozen=True)
class BadSubmatrix:
    """A 2x2 submatrix of S with four nonzero entries, exactly one positive.

    ``rows`` are the two species indices, ``cols`` the two reaction
    indices (each ascending), and ``positive_at`` locates the unique
    positive entry within S.
    """

    rows: Tuple[int, int]
    cols: Tuple[int, int]
    positive_at: Tuple[int, int]


@dataclass(frozen=True)
class BadClass:
    """All bad submatrices sharing one positive entry of S.

    The classes partition the bad-submatrix set; one fixing step removes
    exactly one class.
    """

    positive_entry: Tuple[int, int]
    members: Tuple[BadSubmatrix, ...]

    @property
    def size(self) -> int:
        return len(self.members)


def sign_pattern(matrix: RationalMatrix) -> SignMatrix:
    """Entrywise signs of an exact matrix."""
    return tuple(tuple(Sign.of(v) for v in row) for row in matrix.entries())


def hermitian_square_status(pattern: SignMatrix) -> SignStatusMatrix:
    """Sign statuses of A A^t for a sign pattern A.

    Entry (i, j) is ambiguous iff there are columns k, l with
    sign A_ik = sign A_jk != 0 and sign A_il = -sign A_jl != 0; otherwise
    it carries the common sign of the nonzero products A_ik * A_jk (zero
    if none).  Diagonal entries are never minus.
    """
    rows = len(pattern)
    cols = len(pattern[0]) if rows else 0
    out: List[List[Status]] = []
    for i in range(rows):
        row_status: List[Status] = []
        for j in range(rows):
            positive = False
            negative = False
            for k in range(cols):
                a, b = pattern[i][k], pattern[j][k]
                if a is Sign.ZERO or b is Sign.ZERO:
                    continue
                if a is b:
                    positive = True
                else:
                    negative = True
            if positive and negative:
                row_status.append(Status.AMBIGUOUS)
            elif positive:
                row_status.append(Status.PLUS)
            elif negative:
                row_status.append(Status.MINUS)
            else:
                row_status.append(Status.ZERO)
        out.append(row_status)
    return SignStatusMatrix(tuple(tuple(r) for r in out))


def find_bad_submatrices(S: RationalMatrix) -> List[BadClass]:
    """Enumerate every 2x2 submatrix of S with exactly one positive and
    three negative entries, grouped into equivalence classes by the shared
    positive entry.

    For each row pair only the columns hitting both rows can participate,
    and a valid column pair combines one all-negative column with one
    single-positive column; enumerating those directly visits exactly the
    submatrices the full scan would accept, in the same order.  Classes
    are listed in lexicographic order of their positive entry (row, then
    column); members keep the enumeration order.
    """
    sgn = [
        [1 if v > 0 else (-1 if v < 0 else 0) for v in row]
        for row in S.entries()
    ]
    by_entry: dict = {}
    for i in range(S.rows - 1):
        row_i = sgn[i]
        for j in range(i + 1, S.rows):
            row_j = sgn[j]
            # columns nonzero in both rows, split by positive count
            both_negative: List[int] = []
            one_positive: List[Tuple[int, int]] = []  # (col, row of the +)
            for c in range(S.cols):
                a, b = row_i[c], row_j[c]
                if a == 0 or b == 0 or (a > 0 and b > 0):
                    continue
                if a < 0 and b < 0:
                    both_negative.append(c)
                else:
                    one_positive.append((c, i if a > 0 else j))
            if not both_negative or not one_positive:
                continue
            pairs = []
            for k in both_negative:
                for pos_col, pos_row in one_positive:
                    cols = (k, pos_col) if k < pos_col else (pos_col, k)
                    pairs.append((cols, pos_row, pos_col))
            for cols, pos_row, pos_col in sorted(pairs):
                bad = BadSubmatrix((i, j), cols, (pos_row, pos_col))
                by_entry.setdefault((pos_row, pos_col), []).append(bad)
    return [
        BadClass(entry, tuple(members))
        for entry, members in sorted(by_entry.items())
    ]


def jacobian_sign_status(net: Network) -> SignStatusMatrix:
    """Sign statuses of the reaction Jacobian S v'(x) over the positive
    orthant, valid for every monotone nondecreasing flux family.

    Term k of entry (i, j) contributes sign(S_ik) exactly when reaction k
    consumes species j (S_jk < 0); an entry is ambiguous iff both signs
    occur among its contributing terms.

    Raises:
        ValueError: if the network violates reaction form (some species
            appears on both sides of a reaction), since then flux
            dependencies are not determined by the signs of S.
    """
    violations = validate_reaction_form(net)
    if violations:
        raise ValueError(
            f"network is not in reaction form (violations: {violations}); "
            "sign analysis does not apply"
        )
    S = stoichiometric_matrix(net)
    d = S.rows
    out: List[List[Status]] = []
    for i in range(d):
        row_status: List[Status] = []
        for j in range(d):
            positive = False
            negative = False
            for k in range(S.cols):
                if S[j, k] < 0 and S[i, k] != 0:
                    if S[i, k] > 0:
                        positive = True
                    else:
                        negative = True
            if positive and negative:
                row_status.append(Status.AMBIGUOUS)
            elif positive:
                row_status.append(Status.PLUS)
            elif negative:
                row_status.append(Status.MINUS)
            else:
                row_status.append(Status.ZERO)
        out.append(row_status)
    return SignStatusMatrix(tuple(tuple(r) for r in out))
