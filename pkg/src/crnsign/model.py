"""Core data model: species, complexes, reactions, networks, and the
exact-rational matrices derived from them.

Everything in this module is immutable after construction and uses
`fractions.Fraction` throughout, so all derived matrices are exact and
bit-reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

SPECIES_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")

RationalLike = Union[int, str, Fraction]


def _to_fraction(value: RationalLike) -> Fraction:
    """Coerce ints, strings like "3", "0.5" or "2/3", and Fractions."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class Species:
    """A chemical species.

    Attributes:
        name: Identifier; must match ``[A-Za-z_][A-Za-z0-9_']*``.
        index: 0-based position in the owning network's species order.
    """

    name: str
    index: int

    def __post_init__(self) -> None:
        if not SPECIES_NAME_RE.match(self.name):
            raise ValueError(f"invalid species name {self.name!r}")
        if self.index < 0:
            raise ValueError("species index must be nonnegative")


@dataclass(frozen=True)
class Complex:
    """A formal nonnegative combination of species (one side of a reaction).

    ``terms`` maps species index to a strictly positive rational
    coefficient, stored as a tuple of (index, coefficient) pairs sorted by
    index.  The empty tuple is the zero complex.  Two complexes are equal
    iff their term maps are equal.
    """

    terms: Tuple[Tuple[int, Fraction], ...]

    def __post_init__(self) -> None:
        seen = set()
        for index, coeff in self.terms:
            if index in seen:
                raise ValueError(f"duplicate species index {index} in complex")
            seen.add(index)
            if coeff <= 0:
                raise ValueError("complex coefficients must be positive")
        if list(self.terms) != sorted(self.terms, key=lambda t: t[0]):
            raise ValueError("complex terms must be sorted by species index")

    @classmethod
    def from_dict(cls, terms: Mapping[int, RationalLike]) -> "Complex":
        items = sorted((i, _to_fraction(c)) for i, c in terms.items())
        return cls(tuple(items))

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def coefficient(self, species_index: int) -> Fraction:
        for index, coeff in self.terms:
            if index == species_index:
                return coeff
        return Fraction(0)

    def species_indices(self) -> Tuple[int, ...]:
        return tuple(index for index, _ in self.terms)

    def format(self, species: Sequence[Species]) -> str:
        """Render as text, e.g. ``3B+C``; the zero complex renders as ``0``."""
        if not self.terms:
            return "0"
        parts = []
        for index, coeff in self.terms:
            name = species[index].name
            parts.append(name if coeff == 1 else f"{coeff}{name}")
        return "+".join(parts)


@dataclass(frozen=True)
class Reaction:
    """A single irreversible reaction: reactant complex -> product complex.

    Attributes:
        reactant: Consumed complex.
        product: Produced complex.
        rate: Optional strictly positive rate constant.
        label: Optional free-form tag (kept through transformations).
    """

    reactant: Complex
    product: Complex
    rate: Optional[float] = None
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.reactant == self.product:
            raise ValueError("reactant and product complexes must differ")
        if self.rate is not None and not self.rate > 0:
            raise ValueError("rate constants must be strictly positive")

    def shared_species(self) -> Tuple[int, ...]:
        """Species indices occurring on both sides of this reaction."""
        reactant_side = set(self.reactant.species_indices())
        return tuple(i for i in self.product.species_indices() if i in reactant_side)

    def format(self, species: Sequence[Species]) -> str:
        return f"{self.reactant.format(species)} -> {self.product.format(species)}"


@dataclass(frozen=True)
class Network:
    """An ordered reaction network.

    The species order fixes matrix row order and the reaction order fixes
    column order.  Reversible input reactions are stored as two
    irreversible reactions (forward first); the pairing is retained in
    ``reversible_pairs`` as (forward index, reverse index) tuples so that
    serialization can reconstruct the reversible syntax.

    By default a reaction whose reactant and product complexes share a
    species is rejected because it breaks the reaction-form property that
    flux j depends exactly on the species consumed by reaction j.  Pass
    ``allow_catalysts=True`` to store such networks anyway; sign-pattern
    analyses will then report themselves not applicable.
    """

    species: Tuple[Species, ...]
    reactions: Tuple[Reaction, ...]
    reversible_pairs: Tuple[Tuple[int, int], ...] = ()
    allow_catalysts: bool = False

    def __post_init__(self) -> None:
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ValueError("species names must be unique")
        for position, s in enumerate(self.species):
            if s.index != position:
                raise ValueError(
                    f"species {s.name!r} has index {s.index}, expected {position}"
                )
        if not self.reactions:
            raise ValueError("a network must contain at least one reaction")
        referenced = set()
        for r in self.reactions:
            for side in (r.reactant, r.product):
                for index, _ in side.terms:
                    if index >= len(self.species):
                        raise ValueError(f"species index {index} out of range")
                    referenced.add(index)
        unreferenced = set(range(len(self.species))) - referenced
        if unreferenced:
            missing = ", ".join(self.species[i].name for i in sorted(unreferenced))
            raise ValueError(f"species never referenced by any reaction: {missing}")
        if not self.allow_catalysts:
            for j, r in enumerate(self.reactions):
                shared = r.shared_species()
                if shared:
                    names_ = ", ".join(self.species[i].name for i in shared)
                    raise ValueError(
                        f"reaction {j} has species on both sides ({names_}); "
                        "pass allow_catalysts=True to store it anyway"
                    )
        for fwd, rev in self.reversible_pairs:
            if not (0 <= fwd < len(self.reactions) and 0 <= rev < len(self.reactions)):
                raise ValueError("reversible pair index out of range")
            if (
                self.reactions[fwd].reactant != self.reactions[rev].product
                or self.reactions[fwd].product != self.reactions[rev].reactant
            ):
                raise ValueError(
                    f"reactions {fwd} and {rev} are not mirror images; "
                    "invalid reversible pairing"
                )

    @property
    def species_count(self) -> int:
        return len(self.species)

    @property
    def reaction_count(self) -> int:
        return len(self.reactions)

    def species_named(self, name: str) -> Species:
        for s in self.species:
            if s.name == name:
                return s
        raise KeyError(name)

    def format_reaction(self, j: int) -> str:
        return self.reactions[j].format(self.species)


class RationalMatrix:
    """A dense matrix of exact rationals.

    Immutable; all arithmetic is exact (no rounding anywhere).  Entries
    are `fractions.Fraction`.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, entries: Sequence[Sequence[RationalLike]]):
        data = tuple(tuple(_to_fraction(v) for v in row) for row in entries)
        if not data or not data[0]:
            raise ValueError("matrix dimensions must be positive")
        width = len(data[0])
        if any(len(row) != width for row in data):
            raise ValueError("ragged rows in matrix")
        self.rows = len(data)
        self.cols = width
        self._data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, key: Tuple[int, int]) -> Fraction:
        i, j = key
        return self._data[i][j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self._data[i]

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(self._data[i][j] for i in range(self.rows))

    def entries(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return self._data

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(
            [[self._data[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def multiply(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError(
                f"dimension mismatch: {self.rows}x{self.cols} times "
                f"{other.rows}x{other.cols}"
            )
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = Fraction(0)
                for k in range(self.cols):
                    acc += self._data[i][k] * other._data[k][j]
                row.append(acc)
            out.append(row)
        return RationalMatrix(out)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self.multiply(other)

    def multiply_vector(self, vector: Sequence[RationalLike]) -> Tuple[Fraction, ...]:
        vec = [_to_fraction(v) for v in vector]
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        return tuple(
            sum((self._data[i][k] * vec[k] for k in range(self.cols)), Fraction(0))
            for i in range(self.rows)
        )

    def with_entry(self, i: int, j: int, value: RationalLike) -> "RationalMatrix":
        rows = [list(row) for row in self._data]
        rows[i][j] = _to_fraction(value)
        return RationalMatrix(rows)

    def to_float_rows(self) -> List[List[float]]:
        return [[float(v) for v in row] for row in self._data]

    def to_string_rows(self) -> List[List[str]]:
        """Rows of exact decimal-free strings such as "3" or "-1/2"."""
        return [[str(v) for v in row] for row in self._data]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(v) for v in row) for row in self._data)
        return f"RationalMatrix({self.rows}x{self.cols}: {body})"


def stoichiometric_matrix(net: Network) -> RationalMatrix:
    """The d x d' matrix whose entry (i, j) is the net production of
    species i by reaction j (product coefficient minus reactant
    coefficient).

    Deterministic: the same network always yields the identical matrix.
    """
    d = net.species_count
    entries = [[Fraction(0)] * net.reaction_count for _ in range(d)]
    for j, reaction in enumerate(net.reactions):
        for index, coeff in reaction.reactant.terms:
            entries[index][j] -= coeff
        for index, coeff in reaction.product.terms:
            entries[index][j] += coeff
    return RationalMatrix(entries)


def validate_reaction_form(net: Network) -> List[Tuple[int, int]]:
    """Find all (species index, reaction index) pairs where a species
    occurs on both sides of one reaction.

    An empty list means the network is in reaction form under mass
    action: flux j depends exactly on the species it consumes.
    """
    violations: List[Tuple[int, int]] = []
    for j, reaction in enumerate(net.reactions):
        for index in reaction.shared_species():
            violations.append((index, j))
    return sorted(violations)
