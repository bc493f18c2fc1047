"""Word enumeration, almost-multiplicativity, irreducibility, conformality."""

import math

import numpy as np
import pytest

from multicone import (CapExceeded, MatrixTuple, SingularMatrix,
                       conformal_split, eigen_multiplicativity_check,
                       enumerate_products, irreducibility_check,
                       kappa_estimate, kappa_table, op_norm, parse_word,
                       strong_conformality_check, word_to_str)

from conftest import random_invertible, rot


def test_singular_matrix_rejected():
    with pytest.raises(SingularMatrix):
        MatrixTuple([np.array([[1.0, 2.0], [2.0, 4.0]])])
    with pytest.raises(SingularMatrix):
        MatrixTuple([np.eye(2), np.zeros((2, 2))])


def test_word_codec_roundtrip():
    for s in ("1", "121", "332211", "12121212"):
        assert word_to_str(parse_word(s)) == s
    assert parse_word("") == ()


def test_enumerate_products_counts_and_values(positive_pair):
    table = dict(enumerate_products(positive_pair, 3))
    assert len(table) == 2 + 4 + 8
    assert np.allclose(table[(1, 2)], [[5.0, 4.0], [3.0, 3.0]])
    assert np.allclose(table[(1,)], [[2.0, 1.0], [1.0, 1.0]])


def test_enumeration_cap():
    t = MatrixTuple([np.eye(2), 2.0 * np.eye(2)])
    with pytest.raises(CapExceeded) as exc:
        next(enumerate_products(t, 60))
    assert exc.value.max_feasible_depth is not None


def test_kappa_frozen_value(positive_pair):
    # the pair's almost-multiplicativity constant: attained on aligned
    # powers, approx 0.973249 and decreasing in depth
    rows = kappa_table(positive_pair, 6)
    assert rows[-1].kappa == pytest.approx(0.973249040, abs=1e-8)
    est = kappa_estimate(positive_pair, 5)
    assert est.kappa == pytest.approx(0.973249449, abs=1e-8)


def test_kappa_identity_augmentation_preserves_constant(positive_pair,
                                                        pair_with_identity):
    # inserting the identity cannot change best/worst norm ratios
    k2 = kappa_table(positive_pair, 4)[-1].kappa
    k3 = kappa_table(pair_with_identity, 4)[-1].kappa
    assert k3 == pytest.approx(k2, rel=1e-12)


def test_kappa_monotone_nonincreasing():
    rng = np.random.default_rng(20240819)
    for _ in range(12):
        t = MatrixTuple([random_invertible(rng), random_invertible(rng)])
        rows = kappa_table(t, 5)
        for a, b in zip(rows, rows[1:]):
            assert b.kappa <= a.kappa + 1e-12
        assert 0.0 < rows[-1].kappa <= 1.0 + 1e-12


def test_kappa_witness_is_attaining(positive_pair):
    rows = kappa_table(positive_pair, 4)
    for r in rows:
        u, v = r.witness_u, r.witness_v
        pu = positive_pair.product(u)
        pv = positive_pair.product(v)
        ratio = op_norm(pu @ pv) / (op_norm(pu) * op_norm(pv))
        assert ratio == pytest.approx(r.kappa, rel=1e-9)


def test_kappa_scale_free():
    rng = np.random.default_rng(77)
    for _ in range(8):
        t = MatrixTuple([random_invertible(rng), random_invertible(rng)])
        k0 = kappa_table(t, 4)[-1].kappa
        ks = kappa_table(t.scale_entry(1, 7.5), 4)[-1].kappa
        assert ks == pytest.approx(k0, rel=1e-9)


def test_kappa_swap_pair_halving_law(diagonal_swap_pair):
    # kappa_n = 2^-(n-1): worst pair is the norm-1 witness against the
    # diagonal blowup
    rows = kappa_table(diagonal_swap_pair, 8)
    for r in rows:
        assert r.kappa == pytest.approx(2.0 ** (-(r.depth - 1)), rel=1e-9)


def test_irreducibility_verdicts(positive_pair, triangular_mixed,
                                 diagonal_swap_pair):
    assert not irreducibility_check(positive_pair).reducible
    assert not irreducibility_check(diagonal_swap_pair).reducible
    r = irreducibility_check(triangular_mixed)
    assert r.reducible
    # diagonal pair: both axes are invariant
    assert len(r.directions) == 2
    assert min(r.directions) == pytest.approx(0.0, abs=1e-12)
    assert max(r.directions) == pytest.approx(math.pi / 2.0, abs=1e-12)


def test_irreducibility_single_parabolic():
    r = irreducibility_check(MatrixTuple([np.array([[1.0, 1.0], [0.0, 1.0]])]))
    assert r.reducible
    assert r.directions == (0.0,)
    assert r.invariant_direction == 0.0


def test_strong_conformality_rotation_pair():
    t = MatrixTuple([2.0 * rot(0.7), 0.5 * rot(1.1)])
    r = strong_conformality_check(t)
    assert r.found
    # identity conjugation works here, so P is proportional to I
    p = r.structure.P / np.max(np.abs(r.structure.P))
    assert np.allclose(p, np.eye(2), atol=1e-8)


def test_strong_conformality_conjugated_pair():
    g = np.array([[2.0, 1.0], [0.5, 1.5]])
    t = MatrixTuple([g @ rot(0.7) @ np.linalg.inv(g),
                     g @ (2.0 * rot(-0.3)) @ np.linalg.inv(g)])
    r = strong_conformality_check(t)
    assert r.found
    # recovered P must match G^-T G^-1 up to scale
    ginv = np.linalg.inv(g)
    target = ginv.T @ ginv
    p = r.structure.P / np.linalg.norm(r.structure.P)
    target = target / np.linalg.norm(target)
    assert np.linalg.norm(p - target) < 1e-6


def test_strong_conformality_rejects_proximal(positive_pair):
    r = strong_conformality_check(positive_pair)
    assert not r.found
    assert r.witness_word is not None


def test_conformal_split_identity_triple(pair_with_identity):
    split = conformal_split(pair_with_identity)
    assert split.e_indices == (3,)
    assert split.h_indices == (1, 2)
    assert not split.closure_failed
    assert split.e_trivial


def test_conformal_split_irrational_rotation_closure_fails():
    t = MatrixTuple([np.diag([2.0, 1.0]), rot(1.0)])
    split = conformal_split(t, closure_cap=64)
    assert split.e_indices == (2,)
    assert split.closure_failed


def test_conformal_split_no_conformal_part(positive_pair):
    split = conformal_split(positive_pair)
    assert split.e_indices == ()
    assert split.h_indices == (1, 2)
    assert split.e_trivial  # empty conformal part acts trivially


def test_eigen_multiplicativity_diagonal_vs_generic(positive_pair,
                                                    diagonal_aligned):
    r = eigen_multiplicativity_check(diagonal_aligned, 3)
    assert r.holds
    assert r.shared_direction is not None
    r2 = eigen_multiplicativity_check(positive_pair, 3)
    assert not r2.holds
    assert r2.witness is not None
    u, v = r2.witness
    # replay the witness: the top eigenvalue modulus is genuinely
    # non-multiplicative on it
    from multicone import eigen_data
    lu = eigen_data(positive_pair.product(u)).lambda_u
    lv = eigen_data(positive_pair.product(v)).lambda_u
    luv = eigen_data(positive_pair.product(u + v)).lambda_u
    assert abs(luv - lu * lv) > 1e-8 * (1.0 + lu * lv)


def test_subtuple_and_conjugate(pair_with_identity):
    sub = pair_with_identity.subtuple((1, 2))
    assert len(sub) == 2
    assert np.allclose(sub.matrix(1), pair_with_identity.matrix(1))
    g = np.array([[1.0, 0.3], [0.0, 1.0]])
    conj = sub.conjugate(g)
    a = conj.matrix(1)
    assert np.allclose(a, g @ sub.matrix(1) @ np.linalg.inv(g))
