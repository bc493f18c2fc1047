"""Closed-form 2x2 spectral data and the proximal/parabolic/conformal split."""

import math

import numpy as np
import pytest

from multicone import (MatrixKind, classify_matrix, det2, eigen_data,
                       is_scalar, norm_on_direction, normalize_det, op_norm,
                       sv_pair, trace2)
from multicone.planar import real_eigendirections, right_singular_direction, unit

from conftest import random_invertible, rot

GOLDEN = np.array([[2.0, 1.0], [1.0, 1.0]])


def test_op_norm_closed_form():
    # largest singular value of [[2,1],[1,1]] is (3+sqrt 5)/2
    assert op_norm(GOLDEN) == pytest.approx((3.0 + math.sqrt(5.0)) / 2.0,
                                            rel=1e-14)


def test_sv_pair_golden():
    sv1, sv2 = sv_pair(GOLDEN)
    assert sv1 == pytest.approx((3.0 + math.sqrt(5.0)) / 2.0, rel=1e-14)
    assert sv1 * sv2 == pytest.approx(1.0, rel=1e-12)


def test_det_trace_basics():
    assert det2(GOLDEN) == pytest.approx(1.0)
    assert trace2(GOLDEN) == pytest.approx(3.0)
    assert det2([[0.0, 1.0], [1.0, 0.0]]) == pytest.approx(-1.0)


def test_sv_product_is_abs_det_many_cases():
    rng = np.random.default_rng(20240817)
    for _ in range(300):
        m = random_invertible(rng)
        sv1, sv2 = sv_pair(m)
        assert sv1 >= sv2 > 0.0
        assert sv1 * sv2 == pytest.approx(abs(det2(m)), rel=1e-9)
        assert sv1 == pytest.approx(op_norm(m), rel=1e-12)


def test_classify_trichotomy():
    assert classify_matrix(np.diag([2.0, 1.0])).kind is MatrixKind.PROXIMAL
    assert classify_matrix([[1.0, 1.0], [0.0, 1.0]]).kind is MatrixKind.PARABOLIC
    assert classify_matrix(rot(0.3)).kind is MatrixKind.CONFORMAL
    assert classify_matrix(2.0 * rot(0.3)).kind is MatrixKind.CONFORMAL
    # scalar matrices count as conformal, not parabolic
    assert classify_matrix(np.eye(2)).kind is MatrixKind.CONFORMAL
    assert classify_matrix(-3.0 * np.eye(2)).kind is MatrixKind.CONFORMAL


def test_classify_near_degenerate_flag():
    exact = classify_matrix([[1.0, 1.0], [0.0, 1.0]])
    assert exact.near_degenerate
    clear = classify_matrix(np.diag([2.0, 1.0]))
    assert not clear.near_degenerate


def test_classify_scale_invariance():
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = random_invertible(rng)
        k0 = classify_matrix(m).kind
        for c in (0.5, 10.0, -2.0):
            assert classify_matrix(c * m).kind is k0


def test_eigen_data_proximal_reconstruction():
    rng = np.random.default_rng(99)
    count = 0
    while count < 200:
        m = random_invertible(rng)
        sd = eigen_data(m)
        if not sd.proximal:
            continue
        count += 1
        assert sd.lambda_u > sd.lambda_s > 0.0
        assert sd.lambda_u * sd.lambda_s == pytest.approx(abs(det2(m)), rel=1e-8)
        # eigendirections: m maps each onto itself with the stated modulus
        for theta, lam in ((sd.u_dir, sd.lambda_u), (sd.s_dir, sd.lambda_s)):
            v = m @ unit(theta)
            assert np.linalg.norm(v) == pytest.approx(lam, rel=1e-7)
            cross = v[0] * math.sin(theta) - v[1] * math.cos(theta)
            assert abs(cross) < 1e-7 * np.linalg.norm(v)


def test_eigen_data_conformal_has_no_directions():
    sd = eigen_data(2.0 * rot(0.4))
    assert not sd.proximal
    assert sd.lambda_u == pytest.approx(2.0, rel=1e-12)
    assert sd.lambda_s == pytest.approx(2.0, rel=1e-12)


def test_real_eigendirections_counts():
    assert len(real_eigendirections(np.diag([2.0, 1.0]))) == 2
    assert len(real_eigendirections([[1.0, 1.0], [0.0, 1.0]])) == 1
    assert real_eigendirections(rot(0.7)) == []
    # scalars fix every direction; the canonical answer is "none listed"
    assert real_eigendirections(np.eye(2)) == []


def test_is_scalar():
    assert is_scalar(np.eye(2))
    assert is_scalar(-2.5 * np.eye(2))
    assert not is_scalar(np.diag([2.0, 1.0]))
    assert not is_scalar(rot(0.2))


def test_normalize_det():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = random_invertible(rng)
        b = normalize_det(m)
        assert abs(det2(b)) == pytest.approx(1.0, rel=1e-10)


def test_norm_on_direction_bounds():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m = random_invertible(rng)
        sv1, sv2 = sv_pair(m)
        theta = rng.uniform(0.0, math.pi)
        r = norm_on_direction(m, theta)
        assert sv2 - 1e-9 <= r <= sv1 + 1e-9


def test_right_singular_direction_attains_op_norm():
    rng = np.random.default_rng(13)
    for _ in range(200):
        m = random_invertible(rng)
        theta = right_singular_direction(m)
        assert norm_on_direction(m, theta) == pytest.approx(op_norm(m),
                                                            rel=1e-9)


def test_op_norm_submultiplicative_pairs():
    rng = np.random.default_rng(17)
    for _ in range(300):
        a, b = random_invertible(rng), random_invertible(rng)
        assert op_norm(a @ b) <= op_norm(a) * op_norm(b) * (1.0 + 1e-12)
        # ratio supermultiplicativity: sv2/sv1 of the product is at least
        # the product of the factors' ratios
        ra = sv_pair(a)[1] / sv_pair(a)[0]
        rb = sv_pair(b)[1] / sv_pair(b)[0]
        rp = sv_pair(a @ b)[1] / sv_pair(a @ b)[0]
        assert rp >= ra * rb * (1.0 - 1e-9)
