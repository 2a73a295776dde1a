from fractions import Fraction

import pytest

from crnsign.model import (
    Complex,
    Network,
    RationalMatrix,
    Reaction,
    Species,
    stoichiometric_matrix,
    validate_reaction_form,
)


def _net(reactions, names):
    species = tuple(Species(n, i) for i, n in enumerate(names))
    return Network(species, tuple(reactions))


def test_species_name_validation():
    Species("A'", 0)
    Species("x_1", 3)
    with pytest.raises(ValueError):
        Species("2A", 0)
    with pytest.raises(ValueError):
        Species("A B", 0)
    with pytest.raises(ValueError):
        Species("A", -1)


def test_complex_normalization_and_lookup():
    c = Complex.from_dict({2: 1, 0: Fraction(3, 2)})
    assert c.terms == ((0, Fraction(3, 2)), (2, Fraction(1)))
    assert c.coefficient(0) == Fraction(3, 2)
    assert c.coefficient(5) == 0
    assert not c.is_empty
    assert Complex.from_dict({}).is_empty


def test_complex_rejects_nonpositive_coefficients():
    with pytest.raises(ValueError):
        Complex.from_dict({0: 0})
    with pytest.raises(ValueError):
        Complex.from_dict({0: -2})


def test_complex_format():
    species = tuple(Species(n, i) for i, n in enumerate("ABC"))
    assert Complex.from_dict({}).format(species) == "0"
    assert Complex.from_dict({0: 1, 1: 3}).format(species) == "A+3B"
    assert Complex.from_dict({2: Fraction(1, 2)}).format(species) == "1/2C"


def test_reaction_rejects_equal_sides_and_bad_rate():
    a, b = Complex.from_dict({0: 1}), Complex.from_dict({1: 1})
    with pytest.raises(ValueError):
        Reaction(a, a)
    with pytest.raises(ValueError):
        Reaction(a, b, rate=0.0)
    with pytest.raises(ValueError):
        Reaction(a, b, rate=-1.0)
    assert Reaction(a, b, rate=2.5).rate == 2.5


def test_network_requires_all_species_referenced():
    a, b = Complex.from_dict({0: 1}), Complex.from_dict({1: 1})
    with pytest.raises(ValueError) as err:
        _net([Reaction(a, b)], ["A", "B", "Ghost"])
    assert "Ghost" in str(err.value)


def test_network_rejects_catalysts_by_default():
    # A + B -> 2B consumes and produces B in the same reaction.
    r = Reaction(Complex.from_dict({0: 1, 1: 1}), Complex.from_dict({1: 2}))
    with pytest.raises(ValueError):
        _net([r], ["A", "B"])
    species = tuple(Species(n, i) for i, n in enumerate("AB"))
    net = Network(species, (r,), allow_catalysts=True)
    assert net.allow_catalysts
    assert validate_reaction_form(net) == [(1, 0)]


def test_network_validates_reversible_pairs():
    f = Reaction(Complex.from_dict({0: 1}), Complex.from_dict({1: 1}))
    r = Reaction(Complex.from_dict({1: 1}), Complex.from_dict({0: 1}))
    species = tuple(Species(n, i) for i, n in enumerate("AB"))
    net = Network(species, (f, r), ((0, 1),))
    assert net.reversible_pairs == ((0, 1),)
    other = Reaction(Complex.from_dict({1: 2}), Complex.from_dict({0: 1}))
    with pytest.raises(ValueError):
        Network(species, (f, other), ((0, 1),))


def test_stoichiometric_matrix_small():
    # 2A + B -> 4C
    r = Reaction(Complex.from_dict({0: 2, 1: 1}), Complex.from_dict({2: 4}))
    net = _net([r], ["A", "B", "C"])
    S = stoichiometric_matrix(net)
    assert S.entries() == (
        (Fraction(-2),),
        (Fraction(-1),),
        (Fraction(4),),
    )


def test_stoichiometric_matrix_deterministic():
    r = Reaction(Complex.from_dict({0: 1}), Complex.from_dict({1: 1}))
    net = _net([r], ["A", "B"])
    assert stoichiometric_matrix(net) == stoichiometric_matrix(net)
    assert hash(stoichiometric_matrix(net)) == hash(stoichiometric_matrix(net))


def test_rational_matrix_operations():
    m = RationalMatrix([[1, 2], [3, 4]])
    assert m[0, 1] == 2
    assert m.row(1) == (Fraction(3), Fraction(4))
    assert m.column(0) == (Fraction(1), Fraction(3))
    assert m.transpose().entries() == ((Fraction(1), Fraction(3)), (Fraction(2), Fraction(4)))
    product = m @ RationalMatrix.identity(2)
    assert product == m
    assert m.multiply_vector([1, 1]) == (Fraction(3), Fraction(7))
    bumped = m.with_entry(0, 0, Fraction(9))
    assert bumped[0, 0] == 9 and m[0, 0] == 1
    assert m.to_string_rows() == [["1", "2"], ["3", "4"]]


def test_rational_matrix_rejects_bad_shapes():
    with pytest.raises(ValueError):
        RationalMatrix([])
    with pytest.raises(ValueError):
        RationalMatrix([[1, 2], [3]])
    with pytest.raises(ValueError):
        RationalMatrix([[1]]).multiply(RationalMatrix([[1, 2], [3, 4]]))


def test_validate_reaction_form_clean_network(two_ambiguous):
    assert validate_reaction_form(two_ambiguous) == []
