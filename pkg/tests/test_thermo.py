"""Pressure brackets, cylinder measures, equilibrium constructions, bands."""

import math

import numpy as np
import pytest

from multicone import (CylinderMeasure, MatrixTuple, PreconditionFailed,
                       bernoulli_equilibrium_triangular, conformal_split,
                       domination_decide, entropy_and_lambda,
                       equilibrium_proxy_measure, eta_measure,
                       fit_locally_constant_potential, gibbs_type_ratio_test,
                       kappa_table, potential_from_certificate,
                       pressure_bounds, quasi_bernoulli_ratio_test,
                       shadowing_deficit, stress_pool, transfer_equilibrium)
from multicone.thermo import partition_logs

from conftest import random_invertible


def test_pressure_brackets_shrink_and_contain(positive_pair):
    kap = kappa_table(positive_pair, 8)[-1].kappa
    pb = pressure_bounds(positive_pair, 1.0, 8, kappa=kap)
    assert pb.lower_certified
    # frozen endpoints of the depth-8 bracket
    assert pb.lower == pytest.approx(1.7135127400353052, abs=1e-12)
    assert pb.upper == pytest.approx(1.7169021563042794, abs=1e-12)
    for i in range(1, pb.depth):
        assert pb.uppers[i] <= pb.uppers[i - 1] + 1e-12
        assert pb.lowers[i] >= pb.lowers[i - 1] - 1e-12
        assert pb.lowers[i] <= pb.uppers[i]


def test_pressure_lower_heuristic_without_kappa(positive_pair):
    pb = pressure_bounds(positive_pair, 1.0, 6)
    assert not pb.lower_certified
    assert pb.lower <= pb.upper


def test_pressure_scalar_tuple_collapses():
    t = MatrixTuple([2.0 * np.eye(2)])
    pb = pressure_bounds(t, 1.0, 6, kappa=1.0)
    assert pb.upper == pytest.approx(math.log(2.0), abs=1e-14)
    assert pb.lower == pytest.approx(math.log(2.0), abs=1e-14)


def test_subadditivity_of_partition_logs():
    rng = np.random.default_rng(20240821)
    for _ in range(20):
        t = MatrixTuple([random_invertible(rng) for _ in range(2)])
        s = rng.uniform(0.3, 2.0)
        a = partition_logs(t, s, 8)
        for n in range(1, 8):
            for m in range(1, 8 - n + 1):
                assert a[n + m - 1] <= a[n - 1] + a[m - 1] + 1e-9


def test_shifted_superadditivity_with_kappa(positive_pair):
    s = 1.0
    kap = kappa_table(positive_pair, 6)[-1].kappa
    a = partition_logs(positive_pair, s, 12)
    for n in range(1, 12):
        for m in range(1, 12 - n + 1):
            assert a[n + m - 1] >= a[n - 1] + a[m - 1] + s * math.log(kap) - 1e-9


def test_bernoulli_measure_exact():
    mu = CylinderMeasure.bernoulli((0.25, 0.75), 5)
    assert mu.mass(()) == 1.0
    assert mu.mass((1, 2)) == pytest.approx(0.25 * 0.75, abs=1e-16)
    assert mu.consistency_defect() <= 1e-15
    assert mu.shift_defect() <= 1e-15
    assert mu.invariant


def test_triangular_equilibrium_closed_form(triangular_mixed):
    eq = bernoulli_equilibrium_triangular(triangular_mixed, 1.0)
    assert eq.probs == ((0.25, 0.75),)
    assert eq.which == ("diagonal-c",)
    assert eq.sum_a == pytest.approx(3.0)
    assert eq.sum_c == pytest.approx(4.0)
    assert eq.pressure == pytest.approx(math.log(4.0), abs=1e-14)


def test_triangular_equilibrium_equality_case():
    t = MatrixTuple([np.diag([2.0, 1.0]), np.diag([1.0, 2.0])])
    eq = bernoulli_equilibrium_triangular(t, 1.0)
    # two ergodic equilibrium states at the tie
    assert len(eq.measures) == 2
    assert set(eq.which) == {"diagonal-a", "diagonal-c"}


def test_triangular_requires_invariant_line(positive_pair):
    with pytest.raises(PreconditionFailed):
        bernoulli_equilibrium_triangular(positive_pair, 1.0)


def test_transfer_matches_bernoulli_closed_form(diagonal_aligned):
    cert = domination_decide(diagonal_aligned).certificate
    sol = transfer_equilibrium(diagonal_aligned, 1.0, cert.cone, 6)
    assert sol.eigenvalue == pytest.approx(5.0, abs=1e-10)
    for w, m in sol.measure.level(6):
        target = (2.0 / 5.0) ** w.count(1) * (3.0 / 5.0) ** w.count(2)
        assert m == pytest.approx(target, abs=1e-8)
    h, lam = entropy_and_lambda(sol.measure, diagonal_aligned, 1.0)
    assert h + lam == pytest.approx(math.log(5.0), abs=1e-10)


def test_transfer_measure_consistency_and_pressure_bracket(positive_pair):
    cert = domination_decide(positive_pair).certificate
    sol = transfer_equilibrium(positive_pair, 1.0, cert.cone, 6)
    assert sol.measure.consistency_defect() <= 1e-9
    assert sol.measure.shift_defect() <= 1e-9
    kap = kappa_table(positive_pair, 6)[-1].kappa
    pb = pressure_bounds(positive_pair, 1.0, 12, kappa=kap)
    assert pb.lower <= sol.pressure <= pb.upper


def test_transfer_preconditions(positive_pair):
    cert = domination_decide(positive_pair).certificate
    with pytest.raises(PreconditionFailed):
        transfer_equilibrium(positive_pair, 1.0, None, 4)
    with pytest.raises(PreconditionFailed):
        transfer_equilibrium(positive_pair, 1.0, cert.cone, 0)


def test_variational_inequality_constructed_measures(positive_pair,
                                                     triangular_mixed):
    # entropy + Lyapunov term never exceeds the upper pressure bound by
    # more than the finite-depth slack; equilibria attain it within slack
    kap = kappa_table(positive_pair, 6)[-1].kappa
    pb = pressure_bounds(positive_pair, 1.0, 10, kappa=kap)
    cert = domination_decide(positive_pair).certificate
    sol = transfer_equilibrium(positive_pair, 1.0, cert.cone, 6)
    h, lam = entropy_and_lambda(sol.measure, positive_pair, 1.0)
    assert h + lam <= pb.upper + 0.05
    assert abs(h + lam - pb.midpoint) <= 0.05

    uni = CylinderMeasure.bernoulli((0.5, 0.5), 6)
    h2, lam2 = entropy_and_lambda(uni, positive_pair, 1.0)
    assert h2 + lam2 <= pb.upper + 0.05

    eq = bernoulli_equilibrium_triangular(triangular_mixed, 1.0)
    h3, lam3 = entropy_and_lambda(eq.measures[0], triangular_mixed, 1.0)
    assert abs(h3 + lam3 - eq.pressure) <= 0.05


def test_gibbs_band_rate_triangular(triangular_mixed):
    # raw band spread doubles each depth for the mixed diagonal pair; the
    # per-step rate is the stable statistic, pinned at 2
    mu = CylinderMeasure.bernoulli((0.25, 0.75), 10)
    band = gibbs_type_ratio_test(mu, triangular_mixed, 1.0, math.log(4.0))
    rates = band.per_step_rates()
    for d, rate in zip(band.depths, rates):
        if d >= 4:
            assert rate == pytest.approx(2.0, rel=5e-2)
    deep = [r for d, r in zip(band.depths, rates) if 4 <= d <= 10]
    assert max(deep) / min(deep) < 1.05
    for i in range(1, len(band.depths)):
        assert band.maxs[i] / band.mins[i] >= band.maxs[i - 1] / band.mins[i - 1]


def test_gibbs_band_bounded_for_dominated_pair(positive_pair):
    cert = domination_decide(positive_pair).certificate
    sol = transfer_equilibrium(positive_pair, 1.0, cert.cone, 6)
    kap = kappa_table(positive_pair, 6)[-1].kappa
    pb = pressure_bounds(positive_pair, 1.0, 12, kappa=kap)
    band = gibbs_type_ratio_test(sol.measure, positive_pair, 1.0, pb.midpoint)
    assert band.global_min > 0.9
    assert band.global_max < 1.1


def test_quasi_bernoulli_band(positive_pair):
    cert = domination_decide(positive_pair).certificate
    sol = transfer_equilibrium(positive_pair, 1.0, cert.cone, 6)
    band = quasi_bernoulli_ratio_test(sol.measure)
    assert band.global_min > 0.9
    assert band.global_max < 1.1
    assert band.witness_min is not None


def test_eta_measure_consistency_and_match(pair_with_identity, positive_pair):
    split = conformal_split(pair_with_identity)
    cert = domination_decide(positive_pair).certificate
    base = transfer_equilibrium(positive_pair, 1.0, cert.cone, 6)
    eta = eta_measure(pair_with_identity, split, base, 6)
    assert eta.measure.consistency_defect() <= 1e-12
    assert eta.measure.shift_defect() <= 1e-9
    assert eta.q == pytest.approx(1.0 / (1.0 + math.exp(base.pressure)),
                                  rel=1e-12)
    assert eta.pressure == pytest.approx(
        math.log(1.0 + math.exp(base.pressure)), rel=1e-12)
    # eta masses stay within a tight band of the full triple's transfer state
    from multicone import find_unstable_multicone
    ucert, _cloud, _r = find_unstable_multicone(pair_with_identity)
    full = transfer_equilibrium(pair_with_identity, 1.0, ucert.cone, 6,
                                relaxed=True)
    ratios = [eta.measure.mass(w) / m for w, m in full.measure.masses.items()
              if len(w) > 0 and m > 0.0]
    assert min(ratios) > 0.98
    assert max(ratios) < 1.02


def test_eta_requires_trivial_conformal_action():
    t = MatrixTuple([np.array([[2.0, 1.0], [1.0, 1.0]]),
                     np.array([[2.0, 1.0], [1.0, 2.0]]),
                     np.array([[0.0, -1.0], [1.0, 0.0]])])  # rotation, not I
    split = conformal_split(t)
    assert split.e_indices == (3,)
    assert not split.e_trivial
    pair = t.subtuple(split.h_indices)
    cert = domination_decide(pair).certificate
    base = transfer_equilibrium(pair, 1.0, cert.cone, 4)
    with pytest.raises(PreconditionFailed):
        eta_measure(t, split, base, 4)


def test_proxy_measure_consistency(diagonal_swap_pair):
    mu = equilibrium_proxy_measure(diagonal_swap_pair, 1.0, 5, 9)
    assert mu.consistency_defect() <= 1e-12
    assert abs(sum(m for _w, m in mu.level(1)) - 1.0) <= 1e-12


def test_stress_pool_deterministic_and_nested():
    p1 = stress_pool(3, 40, seed=0)
    p2 = stress_pool(3, 40, seed=0)
    assert p1 == p2
    p3 = stress_pool(3, 40, seed=1)
    assert p1 != p3
    for w in p1:
        assert len(w) == 40
        assert all(1 <= s <= 3 for s in w)


def test_shadowing_deficit_grows_for_identity_triple(pair_with_identity):
    # locally constant potentials cannot shadow log-norm Birkhoff sums on
    # the identity-augmented tuple: the best-fit deficit grows with horizon
    pool = stress_pool(3, 40, seed=0)
    vals = []
    for horizon in (10, 20, 30, 40):
        f = fit_locally_constant_potential(pair_with_identity, 4, horizon,
                                           pool=pool)
        vals.append(shadowing_deficit(pair_with_identity, f, horizon,
                                      pool=pool).value)
    for a, b in zip(vals, vals[1:]):
        assert b > a + 1e-3
    assert vals[0] == pytest.approx(0.0457, abs=5e-3)
    assert vals[-1] == pytest.approx(0.1746, abs=1e-2)


def test_shadowing_deficit_flat_for_dominated_pair(positive_pair):
    # the certificate-steered potential shadows the pair uniformly: the
    # deficit stays bounded as the horizon grows
    cert = domination_decide(positive_pair).certificate
    f = potential_from_certificate(positive_pair, 1.0, cert.cone, 8)
    pool = stress_pool(2, 40, seed=0)
    vals = [shadowing_deficit(positive_pair, f, h, pool=pool).value
            for h in (10, 20, 30, 40)]
    assert vals[-1] == pytest.approx(0.0271, abs=5e-3)
    assert vals[-1] - vals[0] < 5e-3


def test_measure_restriction(positive_pair):
    cert = domination_decide(positive_pair).certificate
    sol = transfer_equilibrium(positive_pair, 1.0, cert.cone, 6)
    sub = sol.measure.restricted(3)
    assert sub.depth == 3
    for w, m in sub.level(3):
        assert m == pytest.approx(sol.measure.mass(w), abs=1e-15)
