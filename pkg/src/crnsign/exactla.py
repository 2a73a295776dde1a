"""Exact rational dense linear algebra.

Rank and determinant use fraction-free (Bareiss) elimination on
denominator-cleared rows to keep intermediate entries small; kernel bases
come from an exact reduced row echelon form; conservation-law feasibility
{m : S^t m = 0, m >= 1} is decided by an exact phase-1 simplex with
Bland's rule.  Nothing in this module ever rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import List, Optional, Sequence, Tuple

from .model import RationalMatrix

Vector = Tuple[Fraction, ...]


@dataclass(frozen=True)
class KernelBasis:
    """A basis of the exact right or left kernel of a matrix.

    Every vector satisfies M v = 0 (side "right") or v^t M = 0 (side
    "left") exactly, and the vectors are linearly independent.
    """

    vectors: Tuple[Vector, ...]
    side: str

    def __post_init__(self) -> None:
        if self.side not in ("right", "left"):
            raise ValueError("side must be 'right' or 'left'")

    @property
    def dim(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class ConservationResult:
    """Outcome of the conservation-law feasibility check.

    When ``conserving`` is true, ``witness`` is a rational vector m with
    every entry >= 1 and m^t S = 0 exactly.
    """

    conserving: bool
    witness: Optional[Vector] = None


def _integer_rows(matrix: RationalMatrix) -> List[List[int]]:
    """Scale each row by the lcm of its denominators (rank-preserving)."""
    out = []
    for row in matrix.entries():
        denom = 1
        for v in row:
            denom = lcm(denom, v.denominator)
        out.append([int(v * denom) for v in row])
    return out


def rank(matrix: RationalMatrix) -> int:
    """Exact rank via fraction-free Gaussian elimination.

    Pivot choice is the first nonzero entry in column order, so the
    elimination (and any intermediate state) is deterministic.
    """
    a = _integer_rows(matrix)
    rows, cols = matrix.rows, matrix.cols
    prev = 1
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        if r == rows:
            break
    return r


def determinant(matrix: RationalMatrix) -> Fraction:
    """Exact determinant (square matrices) via Bareiss elimination."""
    if matrix.rows != matrix.cols:
        raise ValueError("determinant needs a square matrix")
    a = [list(row) for row in matrix.entries()]
    n = matrix.rows
    scale = Fraction(1)
    for i in range(n):
        denom = 1
        for v in a[i]:
            denom = lcm(denom, v.denominator)
        scale *= denom
        a[i] = [int(v * denom) for v in a[i]]
    prev = 1
    sign = 1
    for c in range(n):
        pivot_row = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != c:
            a[c], a[pivot_row] = a[pivot_row], a[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                a[i][j] = (a[c][c] * a[i][j] - a[i][c] * a[c][j]) // prev
            a[i][c] = 0
        prev = a[c][c]
    return Fraction(sign * a[n - 1][n - 1]) / scale


def _rref(matrix: RationalMatrix) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form with the pivot columns, exact."""
    a = [list(row) for row in matrix.entries()]
    rows, cols = matrix.rows, matrix.cols
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = a[r][c]
        a[r] = [v / inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [a[i][j] - factor * a[r][j] for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def _normalize(vector: Sequence[Fraction]) -> Vector:
    """Scale to coprime integers with positive leading nonzero entry."""
    denom = 1
    for v in vector:
        denom = lcm(denom, v.denominator)
    ints = [int(v * denom) for v in vector]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    leading = next((v for v in ints if v != 0), 0)
    if leading < 0:
        ints = [-v for v in ints]
    return tuple(Fraction(v) for v in ints)


def kernel_basis(matrix: RationalMatrix, side: str = "right") -> KernelBasis:
    """Exact kernel basis; dimension is cols - rank (right) or
    rows - rank (left).

    Basis vectors are normalized to coprime integer entries with a
    positive leading entry, and ordered by their free column.
    """
    if side == "left":
        flipped = kernel_basis(matrix.transpose(), "right")
        return KernelBasis(flipped.vectors, "left")
    if side != "right":
        raise ValueError("side must be 'right' or 'left'")
    a, pivots = _rref(matrix)
    free_cols = [c for c in range(matrix.cols) if c not in pivots]
    vectors = []
    for f in free_cols:
        v = [Fraction(0)] * matrix.cols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -a[r][f]
        vectors.append(_normalize(v))
    return KernelBasis(tuple(vectors), "right")


def _phase1_simplex(
    equations: List[List[Fraction]], rhs: List[Fraction]
) -> Optional[List[Fraction]]:
    """Solve {u >= 0 : A u = b} exactly; returns u or None if infeasible.

    Phase-1 simplex: one artificial variable per equation, minimize their
    sum, entering/leaving choices by Bland's rule (anti-cycling).
    """
    m = len(equations)
    n = len(equations[0]) if m else 0
    tableau: List[List[Fraction]] = []
    for i in range(m):
        row = list(equations[i])
        b = rhs[i]
        if b < 0:
            row = [-v for v in row]
            b = -b
        row.extend(Fraction(1) if k == i else Fraction(0) for k in range(m))
        row.append(b)
        tableau.append(row)
    total = n + m
    basis = [n + i for i in range(m)]
    # Reduced-cost row for the phase-1 objective (artificials cost 1);
    # basic artificial columns start with reduced cost zero.
    obj = [Fraction(0)] * (total + 1)
    for j in range(total + 1):
        obj[j] = -sum(tableau[i][j] for i in range(m))
    for i in range(m):
        obj[n + i] = Fraction(0)

    while True:
        entering = next((j for j in range(total) if obj[j] < 0), None)
        if entering is None:
            break
        leaving = None
        best_ratio: Optional[Fraction] = None
        for i in range(m):
            coeff = tableau[i][entering]
            if coeff > 0:
                ratio = tableau[i][total] / coeff
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving is None:
            # Unbounded phase-1 objective cannot happen (bounded below by 0);
            # defensive guard.
            return None
        pivot = tableau[leaving][entering]
        tableau[leaving] = [v / pivot for v in tableau[leaving]]
        for i in range(m):
            if i != leaving and tableau[i][entering] != 0:
                factor = tableau[i][entering]
                tableau[i] = [
                    tableau[i][j] - factor * tableau[leaving][j]
                    for j in range(total + 1)
                ]
        if obj[entering] != 0:
            factor = obj[entering]
            obj = [obj[j] - factor * tableau[leaving][j] for j in range(total + 1)]
        basis[leaving] = entering

    objective = -obj[total]
    if objective != 0:
        return None
    u = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            u[var] = tableau[i][total]
    return u


def is_conserving(S: RationalMatrix) -> ConservationResult:
    """Decide exactly whether some m >= 1 (entrywise) has m^t S = 0.

    The lower bound 1 removes the scale degeneracy of the open condition
    "strictly positive left-kernel vector": a positive vector exists iff
    one with entries >= 1 does.  Substituting m = 1 + u reduces the check
    to phase-1 feasibility of {u >= 0 : S^t u = -S^t 1}.
    """
    d = S.rows
    St = S.transpose()
    ones = [Fraction(1)] * d
    rhs = [-sum(St.row(i)[j] * ones[j] for j in range(d)) for i in range(St.rows)]
    equations = [list(St.row(i)) for i in range(St.rows)]
    u = _phase1_simplex(equations, rhs)
    if u is None:
        return ConservationResult(False, None)
    witness = tuple(Fraction(1) + value for value in u)
    residual = S.transpose().multiply_vector(witness)
    if any(v != 0 for v in residual) or any(v < 1 for v in witness):
        raise AssertionError("simplex returned an invalid conservation witness")
    return ConservationResult(True, witness)


def _is_zero(vector: Sequence[Fraction]) -> bool:
    return all(v == 0 for v in vector)


def _member_of_kernel(matrix: RationalMatrix, vector: Sequence[Fraction]) -> bool:
    return _is_zero(matrix.multiply_vector(vector))


def kernel_correspondence_check(S: RationalMatrix, S_check: RationalMatrix, fixstep) -> bool:
    """Verify the one-step kernel correspondence between S and its fix.

    For a fixing step that zeroes the positive entry at (q, l) of value p2
    and borders the matrix with one row and one column, padding a right
    kernel vector v with v[l] and a left kernel vector w with w[q] * p2
    must give bijections between the kernels, preserving (non)negativity.
    The check is performed on exactly computed bases.

    Args:
        S: Original d x d' matrix.
        S_check: Candidate one-step fix, (d+1) x (d'+1).
        fixstep: Step metadata; needs attributes ``modified_column`` (l)
            and ``zeroed_entry`` ((q, p2)).

    Returns:
        True iff both padded bases land in, and span, the kernels of
        ``S_check``, with dimensions preserved.

    Raises:
        ValueError: if the step metadata is inconsistent with the matrix
            shapes.
    """
    if S_check.rows != S.rows + 1 or S_check.cols != S.cols + 1:
        raise ValueError(
            f"expected a one-step fix of {S.rows}x{S.cols}, got "
            f"{S_check.rows}x{S_check.cols}"
        )
    ell = fixstep.modified_column
    q, p2 = fixstep.zeroed_entry
    if not (0 <= ell < S.cols and 0 <= q < S.rows):
        raise ValueError("fix step coordinates out of range for the matrix")
    if S[q, ell] != p2 or p2 <= 0:
        raise ValueError("fix step records a positive entry the matrix lacks")

    right = kernel_basis(S, "right")
    right_check = kernel_basis(S_check, "right")
    if right.dim != right_check.dim:
        return False
    padded_right = []
    for v in right.vectors:
        padded = v + (v[ell],)
        if not _member_of_kernel(S_check, padded):
            return False
        padded_right.append(padded)

    left = kernel_basis(S, "left")
    left_check = kernel_basis(S_check, "left")
    if left.dim != left_check.dim:
        return False
    S_check_t = S_check.transpose()
    for w in left.vectors:
        padded = w + (w[q] * p2,)
        if not _member_of_kernel(S_check_t, padded):
            return False

    # Dimensions agree and the padded images are independent (the first
    # coordinates already are), so the maps are bijections.  Positivity:
    # the added coordinate is a copy (resp. positive multiple) of an
    # existing one, so strict/weak positivity transfers both ways; assert
    # it on the basis and on the basis sum as a concrete spot check.
    samples = list(padded_right)
    if padded_right:
        dim = len(padded_right[0])
        samples.append(tuple(sum(v[j] for v in padded_right) for j in range(dim)))
    for padded in samples:
        head = padded[:-1]
        if (all(x > 0 for x in head)) != (all(x > 0 for x in padded)):
            return False
        if (all(x >= 0 for x in head)) != (all(x >= 0 for x in padded)):
            return False
    return True


def char_poly(matrix: RationalMatrix) -> List[Fraction]:
    """Coefficients of det(lambda I - M), exact, lowest degree first.

    Faddeev-LeVerrier recursion; the returned list has length n+1 and is
    monic (last coefficient 1).
    """
    if matrix.rows != matrix.cols:
        raise ValueError("characteristic polynomial needs a square matrix")
    n = matrix.rows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = RationalMatrix.identity(n)
    for k in range(1, n + 1):
        nk = matrix.multiply(mk)
        trace = sum((nk[i, i] for i in range(n)), Fraction(0))
        coeffs[n - k] = -trace / k
        if k < n:
            bump = [
                [
                    nk[i, j] + (coeffs[n - k] if i == j else 0)
                    for j in range(n)
                ]
                for i in range(n)
            ]
            mk = RationalMatrix(bump)
    return coeffs
