import random

import pytest

from padicslopes.characters import (
    Character,
    WeightDisc,
    _omega_point_map,
    char_eval,
    is_m_analytic,
    omega_pullback,
    star_weights,
)
from padicslopes.padic import PadicNum, one_unit_pow, teichmuller
from padicslopes.series import IwasawaElement, iwasawa_eval


def random_units(rng, p, N, n):
    return tuple(rng.randrange(1, p ** N) // p * p + rng.randrange(1, p) for _ in range(n))


def test_trivial_character_is_one():
    rng = random.Random(0)
    kappa = Character.trivial(5, 6, rank=2)
    for _ in range(10):
        val = char_eval(kappa, random_units(rng, 5, 6, 2))
        assert val.agrees(PadicNum(5, 6, 1))


def test_algebraic_weight_is_monomial():
    p = 5
    kappa = Character.algebraic(p, 3, (3,))
    assert char_eval(kappa, 1 + p).agrees(PadicNum(p, 3, (1 + p) ** 3))
    rng = random.Random(1)
    kappa = Character.algebraic(p, 8, (4, -3, 7))
    for _ in range(15):
        z = random_units(rng, p, 8, 3)
        want = PadicNum(p, 8, z[0]) ** 4 * PadicNum(p, 8, z[1]) ** -3 * PadicNum(p, 8, z[2]) ** 7
        assert char_eval(kappa, z).agrees(want)


def test_char_eval_splits_torsion_and_one_unit_part():
    p, N = 5, 8
    s = PadicNum(p, N, 1234)
    kappa = Character(p, N, (2,), (s,))
    got = char_eval(kappa, 6)
    want = one_unit_pow(PadicNum(p, N, 6), s) * teichmuller(PadicNum(p, N, 6)) ** 2
    assert got.agrees(want)


def test_char_eval_rejects_non_units():
    kappa = Character.algebraic(5, 4, (1,))
    with pytest.raises(ValueError):
        char_eval(kappa, 10)


def test_multiplicativity_100_random_pairs():
    p, N = 5, 7
    rng = random.Random(2)
    kappa = Character(p, N, (3, 1), (PadicNum(p, N, 77), PadicNum(p, N, -5)))
    for _ in range(100):
        z = random_units(rng, p, N, 2)
        w = random_units(rng, p, N, 2)
        zw = tuple(a * b for a, b in zip(z, w))
        lhs = char_eval(kappa, zw)
        rhs = char_eval(kappa, z) * char_eval(kappa, w)
        assert lhs.agrees(rhs)


def test_is_m_analytic_algebraic_and_monotone():
    kappa = Character.algebraic(7, 6, (2, 9))
    for m in range(4):
        assert is_m_analytic(kappa, m)
    # monotone: m-analytic implies (m+1)-analytic
    s = PadicNum(5, 6, 3 * 5)
    kappa = Character(5, 6, (0,), (s,))
    states = [is_m_analytic(kappa, m) for m in range(4)]
    for a, b in zip(states, states[1:]):
        assert (not a) or b


def test_is_m_analytic_valuation_threshold():
    # exponent 1 gives kappa(1+p) - 1 = p of valuation exactly 1; 1 > 1/(5*4)
    kappa = Character(5, 6, (0,), (1,))
    v = (char_eval(kappa, 1 + 5) - 1).valuation()
    assert v == 1
    assert is_m_analytic(kappa, 1)
    with pytest.raises(ValueError):
        is_m_analytic(kappa, -1)


def test_omega_pullback_bf_paper_weight():
    p, N = 5, 6
    k, kp, j = 4, 3, 1
    mu = omega_pullback(Character.algebraic(p, N, (k, kp, j)), "BF")
    assert mu.rank == 2
    assert mu.torsion == (k + kp - 2 * j, j)
    want = Character.algebraic(p, N, (k + kp - 2 * j, j))
    assert mu == want


def test_omega_pullback_trivial_stays_trivial():
    for tag, rank in (("BF", 3), ("TP", 3), ("GSP4", 4)):
        mu = omega_pullback(Character.trivial(5, 5, rank), tag)
        val = char_eval(mu, (1,) * mu.rank)
        assert val.agrees(PadicNum(5, 5, 1))


@pytest.mark.parametrize("tag,rank_g,rank_h", [("BF", 3, 2), ("TP", 3, 1), ("GSP4", 4, 2)])
def test_omega_pullback_pointwise_composition_oracle(tag, rank_g, rank_h):
    p, N = 5, 7
    rng = random.Random(hash(tag) % 1000)
    ks = [rng.randrange(-6, 7) for _ in range(rank_g)]
    lam = Character.algebraic(p, N, ks)
    mu = omega_pullback(lam, tag)
    point_map = _omega_point_map(tag)
    for _ in range(20):
        h_pt = tuple(PadicNum(p, N, z) for z in random_units(rng, p, N, rank_h))
        g_pt = point_map(*h_pt)
        assert char_eval(mu, h_pt).agrees(char_eval(lam, g_pt))


def test_omega_pullback_rejects_bad_tag_and_rank():
    with pytest.raises(ValueError):
        omega_pullback(Character.trivial(5, 4, 3), "XX")
    with pytest.raises(ValueError):
        omega_pullback(Character.trivial(5, 4, 2), "BF")


def test_star_weights_bf_formula():
    assert star_weights(5, 4, 1, "BF") == (4, 3)
    p, N = 5, 6
    ks = [Character.algebraic(p, N, (k,)) for k in (5, 4, 1)]
    s1, s2 = star_weights(*ks, "BF")
    assert s1 == Character.algebraic(p, N, (4,))
    assert s2 == Character.algebraic(p, N, (3,))


def test_star_weights_tp_examples():
    assert star_weights(2, 2, 2, "TP") == (1, 1, 1)
    assert star_weights(0, 0, 0, "TP") == (0, 0, 0)
    with pytest.raises(ValueError):
        star_weights(1, 2, 2, "TP")


def test_star_weights_tp_identity_all_permutations():
    import itertools

    p, N = 5, 7
    for ks in [(2, 4, 6), (3, 5, 2), (0, 2, 2), (7, 7, 0)]:
        stars = star_weights(*ks, "TP")
        for sigma in itertools.permutations(range(3)):
            assert stars[sigma[0]] + stars[sigma[1]] == ks[sigma[2]]
        comps = [Character.algebraic(p, N, (k,)) for k in ks]
        cstars = star_weights(*comps, "TP")
        for sigma in itertools.permutations(range(3)):
            left_t = cstars[sigma[0]].torsion[0] + cstars[sigma[1]].torsion[0]
            assert left_t == ks[sigma[2]]
            left_s = cstars[sigma[0]].analytic[0] + cstars[sigma[1]].analytic[0]
            assert left_s.agrees(comps[sigma[2]].analytic[0])


def test_star_weights_tp_unreduced_torsion_consistency():
    # reduced torsion reps would give the wrong half: k=(0,0,4) at p=5
    p, N = 5, 6
    comps = [Character.algebraic(p, N, (k,)) for k in (0, 0, 4)]
    stars = star_weights(*comps, "TP")
    assert [s.torsion[0] for s in stars] == [2, 2, -2]
    assert stars == tuple(Character.algebraic(p, N, (k,)) for k in (2, 2, -2))


def test_star_weights_on_disc_families():
    p, N, D = 5, 6, 8
    center = Character.algebraic(p, N, (2, 4, 6))
    disc = WeightDisc(center, 1, D)
    uni = disc.universal()
    comps = [uni.component(i) for i in range(3)]
    stars = star_weights(*comps, "TP")
    import itertools

    for sigma in itertools.permutations(range(3)):
        left = stars[sigma[0]].analytic[0] + stars[sigma[1]].analytic[0]
        assert left.agrees(comps[sigma[2]].analytic[0])


def test_weight_disc_center_recovery():
    p, N, D = 5, 6, 8
    center = Character.algebraic(p, N, (3, 1))
    disc = WeightDisc(center, 1, D)
    uni = disc.universal()
    rng = random.Random(3)
    for _ in range(5):
        z = random_units(rng, p, N, 2)
        fam = char_eval(uni, z)
        at_center = iwasawa_eval(fam, (0, 0))
        assert at_center.agrees(char_eval(center, z), min(N, D + 1))


def test_universal_character_specializes_to_in_disc_weights():
    p, N, D, m = 5, 6, 10, 1
    center = Character.algebraic(p, N, (3,))
    disc = WeightDisc(center, m, D)
    uni = disc.universal()
    rng = random.Random(4)
    for c in (1, 2, 7):
        k2 = 3 + (p - 1) * p ** (m + 1) * c
        lam = Character.algebraic(p, N, (k2,))
        for _ in range(4):
            z = random_units(rng, p, N, 1)
            fam = char_eval(uni, z)
            got = disc.specialize(fam, lam)
            assert got.agrees(char_eval(lam, z), min(N, D + 1))


def test_weight_disc_rejects_outside_weights():
    p, N, D = 5, 6, 8
    disc = WeightDisc(Character.algebraic(p, N, (3,)), 1, D)
    uni = disc.universal()
    fam = char_eval(uni, (6,))
    with pytest.raises(ValueError):
        disc.specialize(fam, Character.algebraic(p, N, (4,)))  # torsion differs
    near = Character.algebraic(p, N, (3 + (p - 1) * p,))  # offset v_p = 1, needs >= 2
    with pytest.raises(ValueError):
        disc.specialize(fam, near)


def test_character_validation():
    with pytest.raises(ValueError):
        Character(5, 6, (1,), (PadicNum(7, 6, 1),))
    with pytest.raises(ValueError):
        Character(5, 6, (1, 2), (3,))
    with pytest.raises(TypeError):
        Character(5, 6, (1,), ("x",))
    kappa = Character.trivial(5, 4)
    with pytest.raises(AttributeError):
        kappa.rank = 2


def test_family_char_eval_matches_scalar_at_point():
    # the family value of the universal character, specialized, equals the
    # scalar evaluation: checked through nontrivial torsion too
    p, N, D, m = 5, 6, 10, 1
    center = Character(p, N, (2,), (PadicNum(p, N, 3),))
    disc = WeightDisc(center, m, D)
    uni = disc.universal()
    assert uni.is_family()
    z = 7
    fam = char_eval(uni, z)
    assert isinstance(fam, IwasawaElement)
    got = iwasawa_eval(fam, (0,))
    assert got.agrees(char_eval(center, z), min(N, D + 1))
