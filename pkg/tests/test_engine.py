import itertools
import random

import pytest

from padic_selfsim.congruence import (
    GroupElement,
    coset_lookup,
    elementary,
    is_congruence_member,
    random_congruence_element,
    random_group_element,
    torus_element,
)
from padic_selfsim.endo import apply
from padic_selfsim.engine import (
    act_and_restrict,
    act_letter,
    act_word,
    build_action,
    check_transitive_level1,
    format_word,
    letter_permutation,
    parse_word,
    portrait,
    restriction,
    separating_depth,
)
from padic_selfsim.errors import PrecisionError, PreconditionError


def test_default_instance(action):
    assert (action.d, action.m, action.T) == (48, 2, 2)
    assert action.required_precision(8) == 18


def test_act_letter_examples(action):
    I = GroupElement.identity(2, 2, 24)
    g = elementary(2, 2, 24, 1, 0, 4)
    j, r = act_letter(action, g, 0)
    assert j == 0 and r == apply(action.endo, g)
    for k in (0, 1, 17, 47):
        j, r = act_letter(action, action.transversal[k], 0)
        assert j == k and r.is_identity()
        j, r = act_letter(action, I, k)
        assert j == k and r.is_identity()


def test_act_word_examples(action):
    I = GroupElement.identity(2, 2, 24)
    g = random_group_element(2, 2, 24, random.Random(0))
    assert act_word(action, g, ()) == ()
    assert act_word(action, I, (3, 40, 7)) == (3, 40, 7)
    assert act_word(action, action.transversal[9], (0, 0)) == (9, 0)
    assert restriction(action, g, ()) == g


def test_precision_contract(action):
    g = elementary(2, 2, 10, 1, 0, 4)
    act_word(action, g, (0,) * 4)
    with pytest.raises(PrecisionError, match="depth 5") as exc:
        act_word(action, g, (0,) * 5)
    assert exc.value.required == 12


def test_letter_range(action):
    with pytest.raises(PreconditionError):
        act_letter(action, GroupElement.identity(2, 2, 24), 48)


def test_cocycle_and_composition(action):
    rng = random.Random(20)
    for _ in range(300):
        g1 = random_group_element(2, 2, 24, rng)
        g2 = random_group_element(2, 2, 24, rng)
        v = tuple(rng.randrange(48) for _ in range(rng.randint(0, 4)))
        w2, r2 = act_and_restrict(action, g2, v)
        w1, r1 = act_and_restrict(action, g1, w2)
        w12, r12 = act_and_restrict(action, g1 @ g2, v)
        assert w12 == w1
        assert r12.congruent(r1 @ r2)
        k = rng.randint(0, len(v))
        assert restriction(action, restriction(action, g1, v[:k]), v[k:]).congruent(restriction(action, g1, v))


def test_tree_automorphism(action):
    # bijective on X^2 and prefix-preserving on random words of length <= 4
    rng = random.Random(21)
    g = random_group_element(2, 2, 24, rng)
    images = {act_word(action, g, w) for w in itertools.product(range(48), repeat=2)}
    assert len(images) == 48 * 48
    for _ in range(100):
        w = tuple(rng.randrange(48) for _ in range(4))
        img = act_word(action, g, w)
        for k in range(5):
            assert act_word(action, g, w[:k]) == img[:k]


def test_stabilizer_round_trip(action):
    rng = random.Random(22)
    for _ in range(100):
        g = random_congruence_element(2, 2, 2, 24, rng)
        assert act_letter(action, g, 0) == (0, apply(action.endo, g))


def test_transitivity(action):
    orbit, covers = check_transitive_level1(action, action.transversal.reps)
    assert covers and orbit == tuple(range(48))
    orbit, covers = check_transitive_level1(action, [GroupElement.identity(2, 2, 24)])
    assert orbit == (0,) and not covers


def test_transitivity_single_generator(action):
    h = action.transversal[1]
    orbit, _ = check_transitive_level1(action, [h])
    # oracle: iterate the letter map directly
    expected, x = {0}, 0
    while True:
        x = coset_lookup(action.transversal, h @ action.transversal[x])
        if x in expected:
            break
        expected.add(x)
    assert set(orbit) == expected


@pytest.mark.parametrize("p, vals", [(3, (1, -1))])
def test_transitivity_other_instances(p, vals):
    A = build_action(p, vals, 8)
    assert check_transitive_level1(A, A.transversal.reps)[1]


def test_portrait_examples(action):
    I = GroupElement.identity(2, 2, 24)
    assert portrait(action, I, 2).is_trivial()
    h = action.transversal[5]
    P = portrait(action, h, 1)
    assert P.nodes[()] == tuple(coset_lookup(action.transversal, h @ x) for x in action.transversal.reps)
    assert P.nodes[()][0] == 5
    g = random_group_element(2, 2, 24, random.Random(1))
    assert portrait(action, g @ g.inverse(), 2).is_trivial()


def test_portrait_agrees_with_act_word(action):
    g = random_group_element(2, 2, 24, random.Random(2))
    P = portrait(action, g, 2)
    for w in itertools.product(range(0, 48, 7), repeat=2):
        assert P.image(w) == act_word(action, g, w)


def test_separating_depth_examples(action):
    assert separating_depth(action, GroupElement.identity(2, 2, 24)) is None
    assert separating_depth(action, action.transversal[3]) == 1
    g = elementary(2, 2, 24, 1, 0, 4)
    assert separating_depth(action, g) <= 2
    # oracle: the level-2 permutation at node 0 is nontrivial
    assert not portrait(action, g, 2).is_trivial()


def test_separating_depth_matches_portrait(action):
    rng = random.Random(23)
    for _ in range(5):
        g = random_congruence_element(2, 2, 4, 24, rng)
        d = separating_depth(action, g)
        assert d is not None
        if d <= 2:
            assert not portrait(action, g, d).is_trivial()
            assert d == 1 or portrait(action, g, d - 1).is_trivial()


def test_separating_depth_precision_exhausted(action):
    g = elementary(2, 2, 24, 1, 0, 2**22)
    with pytest.raises(PrecisionError):
        separating_depth(action, g.truncate(8))


def test_word_literals():
    assert parse_word("012", 6) == (0, 1, 2)
    assert parse_word("12.0.47", 48) == (12, 0, 47)
    assert format_word((12, 0, 47), 48) == "12.0.47"
    assert format_word((1, 2), 6) == "12"
    with pytest.raises(PreconditionError):
        parse_word("48", 48)


def test_letter_permutation_is_permutation(action):
    perm = letter_permutation(action, torus_element(2, 2, 24, 0, 3))
    assert sorted(perm) == list(range(48))
