import json
import random

import pytest

from qharm.rootdata import RAT, RootDatum, parse_weight
from qharm.scalars import Scalar


@pytest.fixture(scope="module")
def a1():
    return RootDatum.from_series("A1")


@pytest.fixture(scope="module")
def a2():
    return RootDatum.from_series("A2")


@pytest.fixture(scope="module")
def b2():
    return RootDatum.from_series("B2")


class TestConstruction:
    def test_a1_basics(self, a1):
        assert a1.pos_roots == ((2,),)
        assert a1.rho == (1,)
        alpha = a1.simple_roots[0]
        assert a1.pairing(alpha, alpha) == 2

    def test_a1_exponent_denominator(self, a1):
        # (varpi, varpi) = 1/2 forces L = 2
        assert a1.form[0][0] == RAT(1, 2)
        assert a1.L == 2

    def test_a2_data(self, a2):
        assert len(a2.pos_roots) == 3
        assert a2.form[0][0] == RAT(2, 3)
        assert a2.L == 3

    def test_a2_rho_norm(self, a2):
        assert a2.pairing(a2.rho, a2.rho) == 2

    def test_b2_g2_short_root_normalization(self):
        for spec, n_pos in [("B2", 4), ("G2", 6)]:
            rd = RootDatum.from_series(spec)
            assert len(rd.pos_roots) == n_pos
            norms = [rd.pairing(a, a) for a in rd.pos_roots]
            assert min(norms) == 2

    def test_pairing_with_zero(self, a2):
        assert a2.pairing((3, -1), (0, 0)) == 0

    def test_rejects_non_finite_type(self):
        with pytest.raises(ValueError):
            RootDatum([[2, -2], [-2, 2]])  # affine A1^(1)
        with pytest.raises(ValueError):
            RootDatum([[2, -1], [-5, 2]])

    def test_explicit_cartan_matches_series(self, a2):
        rd = RootDatum([[2, -1], [-1, 2]])
        assert rd.form == a2.form
        assert set(rd.pos_roots) == set(a2.pos_roots)

    def test_json_dump(self, a2):
        data = json.loads(a2.dump())
        assert data["L"] == 3
        assert data["weyl_order"] == 6


class TestWeylGroup:
    def test_a1_two_elements(self, a1):
        W = a1.weyl_group()
        assert len(W) == 2
        assert sorted(w.length for w in W) == [0, 1]
        assert W[0].word == ()

    def test_a2_six_elements(self, a2):
        W = a2.weyl_group()
        assert len(W) == 6
        assert sorted(w.length for w in W) == [0, 1, 1, 2, 2, 3]

    def test_b2_g2_orders(self, b2):
        assert b2.weyl_order == 8
        assert RootDatum.from_series("G2").weyl_order == 12

    def test_sign_sum_vanishes(self, a1, a2):
        for rd in (a1, a2):
            assert sum(w.sign for w in rd.weyl_group()) == 0

    def test_action_preserves_form(self, a2):
        rng = random.Random(5)
        for w in a2.weyl_group():
            for _ in range(5):
                lam = (rng.randint(-3, 3), rng.randint(-3, 3))
                mu = (rng.randint(-3, 3), rng.randint(-3, 3))
                assert a2.pairing(w.act(lam), w.act(mu)) == a2.pairing(lam, mu)

    def test_matrices_injective(self, a2, b2):
        for rd in (a2, b2):
            mats = {w.matrix for w in rd.weyl_group()}
            assert len(mats) == rd.weyl_order

    def test_length_matches_word(self, a2):
        for w in a2.weyl_group():
            assert w.length == len(w.word)
            assert w.sign == (-1) ** w.length

    def test_longest_element(self, a2):
        w0 = a2.longest_element()
        assert w0.length == 3
        assert w0.act(a2.rho) == (-1, -1)


class TestShiftedAction:
    def test_identity_fixes_zero(self, a2):
        e = a2.weyl_group()[0]
        assert a2.shifted_action(e, (0, 0)) == (0, 0)

    def test_a1_reflection_on_zero(self, a1):
        s = a1.weyl_group()[1]
        # s.0 = s(rho) - rho = -2 rho = -alpha
        assert a1.shifted_action(s, (0,)) == (-2,)

    def test_a2_longest_on_zero(self, a2):
        w0 = a2.longest_element()
        assert a2.shifted_action(w0, (0, 0)) == (-2, -2)

    def test_group_action_property(self, a2, b2):
        rng = random.Random(9)
        for rd in (a2, b2):
            W = rd.weyl_group()
            for _ in range(20):
                w1, w2 = rng.choice(W), rng.choice(W)
                lam = (rng.randint(-3, 3), rng.randint(-3, 3))
                lhs = rd.shifted_action(rd.compose(w1, w2), lam)
                rhs = rd.shifted_action(w1, rd.shifted_action(w2, lam))
                assert lhs == rhs


class TestOracles:
    def test_weyl_dim_a1(self, a1):
        assert [a1.weyl_dim((n,)) for n in range(5)] == [1, 2, 3, 4, 5]

    def test_weyl_dim_a2(self, a2):
        assert a2.weyl_dim((1, 0)) == 3
        assert a2.weyl_dim((0, 1)) == 3
        assert a2.weyl_dim((1, 1)) == 8
        assert a2.weyl_dim((2, 2)) == 27

    def test_weyl_dim_b2(self, b2):
        assert b2.weyl_dim((1, 0)) == 5 or b2.weyl_dim((0, 1)) == 5

    def test_q_power_integrality(self, a2):
        s = a2.q_power((1, 0), (0, 1))
        assert isinstance(s, Scalar)

    def test_dominant_enumeration(self, a2):
        weights = a2.dominant_weights_up_to_dim(10)
        assert (0, 0) in weights and (1, 1) in weights
        assert all(a2.weyl_dim(w) <= 10 for w in weights)


class TestParsing:
    def test_integer_coords(self):
        assert parse_weight("2,1", 2) == (2, 1)

    def test_a1_half_integers(self):
        assert parse_weight("3/2", 1) == (3,)
        assert parse_weight("1/2", 1) == (1,)
        assert parse_weight("2", 1) == (2,)

    def test_bad_input(self):
        with pytest.raises(ValueError):
            parse_weight("1,2", 1)
        with pytest.raises(ValueError):
            parse_weight("1/3", 1)
