"""
Test script for Buchi automata.

This script tests lasso automata, the synchronous product, emptiness with
witnesses, the two language checks and HOA export.
"""

import itertools

import numpy as np
import pytest

from src.automata import (
    NBA, LassoSpec, accepts_lasso, check_from_above, check_from_below, is_empty, lasso_nba, product,
    to_hoa, word_nba,
)
from src.errors import InputError
from src.ltl import LassoWord, eval_lasso, parse, to_nba

NAMES = ("a", "b")


def test_lasso_nba_shape():
    spec = LassoSpec((0b01,), (frozenset({0b00, 0b01}), frozenset({0b10})))
    nba = lasso_nba(spec, NAMES)
    assert nba.state_count == 3
    assert nba.initial == frozenset({0})
    assert nba.accepting == frozenset({1})
    assert nba.successors(0, 0b01) == {1}
    assert nba.successors(0, 0b00) == set()
    assert nba.successors(2, 0b10) == {1}
    assert nba.edge_count() == 3


def test_lasso_nba_language():
    spec = LassoSpec((0b01,), (frozenset({0b00, 0b01}), frozenset({0b10})))
    nba = lasso_nba(spec, NAMES)
    assert accepts_lasso(nba, (0b01,), (0b00, 0b10))
    assert accepts_lasso(nba, (0b01,), (0b01, 0b10, 0b00, 0b10))
    assert not accepts_lasso(nba, (0b01,), (0b10, 0b10))
    assert not accepts_lasso(nba, (0b00,), (0b00, 0b10))


def test_word_nba_accepts_only_its_word():
    nba = word_nba((1, 2), (3,), NAMES)
    assert accepts_lasso(nba, (1, 2), (3,))
    assert accepts_lasso(nba, (1, 2, 3), (3, 3))
    assert not accepts_lasso(nba, (1,), (3,))


def test_lasso_spec_validation():
    with pytest.raises(InputError):
        LassoSpec((), ())
    with pytest.raises(InputError):
        LassoSpec((), (frozenset(),))


def test_nba_validation():
    with pytest.raises(InputError):
        NBA.build(NAMES, 1, [[(frozenset({0}), 3)]], {0}, {0})
    with pytest.raises(InputError):
        NBA.build(NAMES, 1, [[(frozenset({4}), 0)]], {0}, {0})
    with pytest.raises(InputError):
        NBA.build(NAMES, 1, [[]], {2}, set())


def test_product_rejects_alphabet_mismatch():
    with pytest.raises(InputError):
        product(word_nba((), (0,), ("a",)), word_nba((), (0,), NAMES))


def test_is_empty_without_accepting_cycle():
    nba = NBA.build(NAMES, 2, [[(frozenset({0}), 1)], []], {0}, {1})
    assert is_empty(nba).empty
    unreachable = NBA.build(NAMES, 2, [[(frozenset({0}), 0)], [(frozenset({0}), 1)]], {0}, {1})
    assert is_empty(unreachable).empty
    blocked = NBA.build(NAMES, 1, [[(frozenset(), 0)]], {0}, {0})
    assert is_empty(blocked).empty


def test_witness_is_a_common_word():
    phi = parse("G F a & F b")
    spec = LassoSpec((0b00, 0b00), (frozenset({0b00, 0b01}), frozenset({0b10, 0b11})))
    a_u = lasso_nba(spec, NAMES)
    result = is_empty(product(a_u, to_nba(phi, NAMES)))
    assert not result.empty
    w = result.witness
    assert len(w.prefix_letters) == len(w.prefix_states)
    assert len(w.cycle_letters) == len(w.cycle_states) >= 1
    assert eval_lasso(phi, LassoWord(w.prefix_letters, w.cycle_letters), NAMES)
    assert accepts_lasso(a_u, w.prefix_letters, w.cycle_letters)


def test_check_from_below_and_above():
    undecided = lasso_nba(LassoSpec((), (frozenset({0b00, 0b01}),)), NAMES)
    phi = parse("G F a")
    assert check_from_below(undecided, phi)
    assert not check_from_above(undecided, phi)

    settled = lasso_nba(LassoSpec((0b00,), (frozenset({0b01, 0b11}),)), NAMES)
    assert check_from_above(settled, phi)
    assert check_from_above(settled, parse("!a & X G a"))
    assert not check_from_below(settled, parse("F G !a"))


def test_hoa_export():
    spec = LassoSpec((0b01,), (frozenset(range(4)), frozenset({0b10})))
    text = to_hoa(lasso_nba(spec, NAMES), name="demo")
    lines = text.splitlines()
    assert lines[0] == "HOA: v1"
    assert 'name: "demo"' in lines
    assert "States: 3" in lines
    assert "Start: 0" in lines
    assert 'AP: 2 "a" "b"' in lines
    assert "Acceptance: 1 Inf(0)" in lines
    assert "State: 1 {0}" in lines
    assert "[(0&!1)] 1" in lines
    assert "[t] 2" in lines
    assert "[(!0&1)] 1" in lines
    assert lines[-1] == "--END--"


def random_nba(rng, n_states, n_props):
    """Random automaton whose edges all carry nonempty letter sets."""
    alphabet = 1 << n_props
    transitions = []
    for _ in range(n_states):
        out = []
        for _ in range(int(rng.integers(0, 4))):
            letters = {int(x) for x in rng.integers(0, alphabet, size=int(rng.integers(1, alphabet + 1)))}
            out.append((frozenset(letters), int(rng.integers(0, n_states))))
        transitions.append(out)
    initial = {0} if rng.random() < 0.7 else {0, int(rng.integers(0, n_states))}
    accepting = {q for q in range(n_states) if rng.random() < 0.4}
    return NBA.build(NAMES[:n_props], n_states, transitions, initial, accepting)


def accepting_cycle_reachable(nba):
    """Reference emptiness test by boolean transitive closure."""
    n = nba.state_count
    step = np.zeros((n, n), dtype=bool)
    for q, out in enumerate(nba.transitions):
        for letters, t in out:
            step[q, t] = step[q, t] or bool(letters)
    reach = step.copy()
    for _ in range(n):
        reach = reach | ((reach.astype(int) @ step.astype(int)) > 0)
    return any((i == s or reach[i, s]) and reach[s, s] for i in nba.initial for s in nba.accepting)


def words(n_props, lengths):
    alphabet = range(1 << n_props)
    for length in lengths:
        yield from itertools.product(alphabet, repeat=length)


def random_lasso_spec(rng):
    prefix = tuple(int(x) for x in rng.integers(0, 4, size=int(rng.integers(0, 4))))
    cycle = tuple(
        frozenset(int(x) for x in rng.integers(0, 4, size=int(rng.integers(1, 4))))
        for _ in range(int(rng.integers(1, 4)))
    )
    return LassoSpec(prefix, cycle)


def random_lasso_word(rng):
    prefix = tuple(int(x) for x in rng.integers(0, 4, size=int(rng.integers(0, 4))))
    cycle = tuple(int(x) for x in rng.integers(0, 4, size=int(rng.integers(1, 4))))
    return LassoWord(prefix, cycle)


FORMULAS = ["G F a", "F G !b", "a U b", "G (a -> X b)", "F a & G !b", "X X (a | b)", "!a U (b & X a)"]


def test_is_empty_matches_reachability_on_random_automata():
    rng = np.random.default_rng(2024)
    for _ in range(400):
        nba = random_nba(rng, int(rng.integers(1, 7)), int(rng.integers(1, 3)))
        result = is_empty(nba)
        assert result.empty == (not accepting_cycle_reachable(nba))
        if not result.empty:
            w = result.witness
            assert accepts_lasso(nba, w.prefix_letters, w.cycle_letters)


def test_is_empty_matches_exhaustive_lasso_search():
    # with n states an accepting run has a stem below n and a loop of at most n steps
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        nba = random_nba(rng, n, 1)
        found = any(accepts_lasso(nba, u, v) for u in words(1, range(n)) for v in words(1, range(1, n + 1)))
        assert found == (not is_empty(nba).empty)


def test_from_above_implies_from_below():
    rng = np.random.default_rng(11)
    for _ in range(30):
        spec = random_lasso_spec(rng)
        a_u = lasso_nba(spec, NAMES)
        for text in FORMULAS:
            phi = parse(text)
            above = check_from_above(a_u, phi)
            assert not above or check_from_below(a_u, phi), text
            if above:
                word = LassoWord(spec.prefix_letters, tuple(min(s) for s in spec.cycle_letter_sets))
                assert eval_lasso(phi, word, NAMES), text


def test_product_language_is_intersection():
    rng = np.random.default_rng(5)
    samples = [random_lasso_word(rng) for _ in range(25)]
    for left, right in itertools.combinations(FORMULAS, 2):
        phi, psi = parse(left), parse(right)
        both = product(to_nba(phi, NAMES), to_nba(psi, NAMES))
        for w in samples:
            expected = eval_lasso(phi, w, NAMES) and eval_lasso(psi, w, NAMES)
            assert accepts_lasso(both, w.prefix, w.cycle) == expected, (left, right, w)
    for _ in range(30):
        a = random_nba(rng, int(rng.integers(1, 5)), 2)
        b = random_nba(rng, int(rng.integers(1, 5)), 2)
        ab = product(a, b)
        for w in samples[:10]:
            expected = accepts_lasso(a, w.prefix, w.cycle) and accepts_lasso(b, w.prefix, w.cycle)
            assert accepts_lasso(ab, w.prefix, w.cycle) == expected


def main():
    """Main function to run the automata tests."""
    tests = [
        test_lasso_nba_shape,
        test_lasso_nba_language,
        test_word_nba_accepts_only_its_word,
        test_lasso_spec_validation,
        test_nba_validation,
        test_product_rejects_alphabet_mismatch,
        test_is_empty_without_accepting_cycle,
        test_witness_is_a_common_word,
        test_check_from_below_and_above,
        test_hoa_export,
        test_is_empty_matches_reachability_on_random_automata,
        test_is_empty_matches_exhaustive_lasso_search,
        test_from_above_implies_from_below,
        test_product_language_is_intersection,
    ]
    print("Testing automata...")
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except AssertionError as e:
            print(f"❌ {test.__name__}: {e}")


if __name__ == "__main__":
    main()
