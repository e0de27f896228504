import numpy as np
import pytest

from martblocks import (BMO_norm, DomainError, Filtration, LevelRangeError,
                        MedianSequence, bmo_alpha_norm, build_block_indicator,
                        build_block_mediandiff, build_block_power, build_block_sign,
                        cm_lemma_check, cond_exp, cond_median, pairing,
                        validate_block, weak_atom, weak_atom_split)
from martblocks.atoms import random_level_set
from martblocks.medians import (check_median_block, indicator_slice_bound,
                                is_cond_median, median_interval)
from conftest import random_instance

A12 = np.array([1, 1, 0, 0], bool)
F_FIX = np.array([1.0, -1.0, 0.0, 0.0])


def brute_medians(f, F, k):
    """All valid medians per block, by testing each value of f against the
    two defining inequalities."""
    w = F.weights
    out = {}
    for b, idx in enumerate(F.blocks(k)):
        mass = w[idx].sum()
        valid = []
        for a in np.unique(f[idx]):
            above = w[idx][f[idx] > a].sum()
            below = w[idx][f[idx] < a].sum()
            if above <= mass / 2 * (1 + 1e-12) and below <= mass / 2 * (1 + 1e-12):
                valid.append(a)
        out[b] = valid
    return out


def test_three_point_fixture():
    F = Filtration([0.5, 0.25, 0.25], [[0, 0, 0]])
    f = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(cond_median(f, F, 1), [1, 1, 1])
    lhs, ok = cm_lemma_check(f, F, 1, np.ones(3, bool))
    assert ok and lhs[0] == pytest.approx(0.5)


def test_two_point_tie_takes_lowest():
    F = Filtration([0.5, 0.5], [[0, 0]])
    f = np.array([1.0, 0.0])
    np.testing.assert_array_equal(cond_median(f, F, 1), [0, 0])
    assert is_cond_median(np.ones(2), f, F, 1)
    lo, hi = median_interval(f, F, 1)
    np.testing.assert_array_equal(lo, [0, 0])
    np.testing.assert_array_equal(hi, [1, 1])


def test_omega4_medians(omega4):
    ms = MedianSequence(F_FIX, omega4)
    assert brute_medians(F_FIX, omega4, 1)[0][0] == 0.0
    np.testing.assert_array_equal(ms.alpha(1), 0.0)
    np.testing.assert_array_equal(ms.alpha(2), [-1, -1, 0, 0])
    np.testing.assert_array_equal(ms.alpha(3), F_FIX)
    assert ms.is_valid()
    assert BMO_norm(F_FIX, omega4) <= 5 * bmo_alpha_norm(F_FIX, omega4) + 1e-12


def test_brute_force_agreement(rng):
    for _ in range(300):
        F, f = random_instance(rng, points=10, depth=4, measurable=False)
        if rng.random() < 0.5:
            f = np.round(f)
        for k in range(1, F.depth + 1):
            alpha = cond_median(f, F, k)
            lo, hi = median_interval(f, F, k)
            brute = brute_medians(f, F, k)
            lab = F.level(k)
            for b, valid in brute.items():
                i = np.flatnonzero(lab == b)[0]
                assert alpha[i] == min(valid)
                assert hi[i] == max(valid)
            assert is_cond_median(alpha, f, F, k)


def test_half_mass_below_median_random(rng):
    for _ in range(300):
        F, f = random_instance(rng, measurable=False)
        k = int(rng.integers(1, F.depth + 1))
        A = random_level_set(rng, F, k)
        lhs, ok = cm_lemma_check(f, F, k, A)
        assert ok
        assert np.all(lhs[A] >= 0.5 - 1e-12)


def test_half_mass_check_rejects_nonmeasurable(omega4):
    with pytest.raises(DomainError):
        cm_lemma_check(F_FIX, omega4, 2, np.array([1, 0, 0, 0], bool))


def test_bmo_alpha_trivial(omega4):
    assert bmo_alpha_norm(np.full(4, -2.0), omega4) == pytest.approx(2.0)
    assert bmo_alpha_norm(np.zeros(4), omega4) == 0.0


def test_bmo_alpha_chain_random(rng):
    for _ in range(300):
        F, f = random_instance(rng, measurable=False)
        assert BMO_norm(f, F) <= 5 * bmo_alpha_norm(f, F) * (1 + 1e-12) + 1e-12


def test_power_block_fixture(omega4):
    mb = build_block_power(A12, F_FIX, omega4, 2)
    assert cond_median(F_FIX, omega4, 2)[0] == -1
    np.testing.assert_allclose(mb.values, [2, -2, 0, 0])
    np.testing.assert_allclose(cond_exp(mb.values, omega4, 2), 0, atol=1e-12)
    resid = np.abs(F_FIX + 1) * A12
    target = 0.5 * np.sum(omega4.weights * resid ** 2)
    assert pairing(F_FIX, mb.values, omega4) >= target - 1e-12
    assert mb.cost <= mb.bound + 1e-12
    assert check_median_block(mb, omega4, 2.0)


def test_power_block_constant_is_zero(omega4):
    mb = build_block_power(A12, np.full(4, 3.0), omega4, 2)
    assert mb.cost == 0 and not mb.block.subatoms


def test_power_block_mirror(rng):
    F = Filtration(np.full(5, 0.2), [[0] * 5, [0, 0, 0, 1, 1]])
    A = np.array([1, 1, 1, 0, 0], bool)
    for _ in range(20):
        f = rng.standard_normal(5)
        a = build_block_power(A, f, F, 2)
        b = build_block_power(A, -f, F, 2)
        np.testing.assert_allclose(b.values, -a.values, atol=1e-12)


@pytest.mark.parametrize("pprime", [2.0, 3.0])
def test_power_block_random(rng, pprime):
    for _ in range(200):
        F, f = random_instance(rng, measurable=False)
        k = int(rng.integers(1, F.depth + 1))
        A = random_level_set(rng, F, k)
        mb = build_block_power(A, f, F, k, pprime)
        r = np.abs(f - cond_median(f, F, k)) * A
        target = 0.5 * np.sum(F.weights * r ** pprime)
        assert pairing(f, mb.values, F) >= target - 1e-9 * max(1, target)
        assert check_median_block(mb, F, pprime / (pprime - 1))
        assert mb.cost <= mb.bound * (1 + 1e-9) + 1e-12


def test_power_block_scaling(rng):
    F, f = random_instance(rng, measurable=False)
    A = np.ones(F.n, bool)
    for pprime in (2.0, 3.0):
        a = pairing(f, build_block_power(A, f, F, 1, pprime).values, F)
        b = pairing(2 * f, build_block_power(A, 2 * f, F, 1, pprime).values, F)
        assert b == pytest.approx(2 ** pprime * a, rel=1e-10, abs=1e-12)


def test_mediandiff_fixture(omega4):
    mb = build_block_mediandiff(A12, F_FIX, omega4, 2)
    np.testing.assert_allclose(cond_exp(mb.values, omega4, 1), 0, atol=1e-12)
    np.testing.assert_allclose(mb.block.values(4), mb.values, atol=1e-12)
    assert check_median_block(mb, omega4, 2.0)
    assert mb.cost <= mb.bound + 1e-12
    with pytest.raises(LevelRangeError):
        build_block_mediandiff(np.ones(4, bool), F_FIX, omega4, 1)


def test_mediandiff_random(rng):
    for _ in range(200):
        F, f = random_instance(rng, measurable=False)
        if F.depth < 2:
            continue
        k = int(rng.integers(2, F.depth + 1))
        A = random_level_set(rng, F, k)
        pprime = float(rng.choice([2.0, 3.0]))
        mb = build_block_mediandiff(A, f, F, k, pprime)
        assert check_median_block(mb, F, pprime / (pprime - 1))
        assert mb.cost <= mb.bound * (1 + 1e-9) + 1e-12
        twice = build_block_mediandiff(A, 2 * f, F, k, pprime)
        np.testing.assert_allclose(twice.values, 2 ** (pprime - 1) * mb.values,
                                   atol=1e-9 * max(1, np.abs(twice.values).max()))


def test_sign_block_fixture(omega4):
    mb = build_block_sign(A12, F_FIX, omega4, 2)
    alpha = cond_median(F_FIX, omega4, 2)
    target = np.sum(omega4.weights * A12 * np.abs(F_FIX - alpha))
    assert abs(pairing(F_FIX, mb.values, omega4)) == pytest.approx(target, abs=1e-12)
    assert check_median_block(mb, omega4, np.inf)


def test_sign_block_trivial(omega4):
    mb = build_block_sign(A12, np.full(4, 1.0), omega4, 2)
    assert np.all(mb.values == 0)
    F = Filtration(np.full(3, 1 / 3), [[0, 0, 0]])
    mb = build_block_sign(np.ones(3, bool), np.array([1.0, 2, 3]), F, 1)
    np.testing.assert_array_equal(mb.parts["b2"], 0)
    np.testing.assert_array_equal(mb.values, [-1, 0, 1])


def test_sign_block_random(rng):
    for _ in range(300):
        F, f = random_instance(rng, measurable=False)
        f = np.round(f) if rng.random() < 0.5 else f
        k = int(rng.integers(1, F.depth + 1))
        A = random_level_set(rng, F, k)
        mb = build_block_sign(A, f, F, k)
        alpha = cond_median(f, F, k)
        target = np.sum(F.weights * A * np.abs(f - alpha))
        assert abs(pairing(f, mb.values, F)) == pytest.approx(target, rel=1e-9, abs=1e-12)
        assert np.abs(mb.parts["b2"]).max() <= 1 + 1e-12
        assert mb.cost <= F.space.measure(A) * (1 + 1e-12)
        assert check_median_block(mb, F, np.inf)


def test_indicator_fixture(omega4):
    assert indicator_slice_bound(A12, omega4, 2, 4) == pytest.approx(1.0, abs=1e-12)
    mb = build_block_indicator(A12, omega4, 2, 4)
    assert mb.parts["slice_bound"] == pytest.approx(1.0, abs=1e-12)
    assert mb.cost <= 3 * 0.5
    assert check_median_block(mb, omega4, np.inf)
    zero = build_block_indicator(np.ones(4, bool), omega4, 2)
    assert zero.cost == 0
    with pytest.raises(LevelRangeError):
        build_block_indicator(np.ones(4, bool), omega4, 1)


def test_indicator_random(rng):
    for _ in range(200):
        F, _ = random_instance(rng)
        if F.depth < 2:
            continue
        k = int(rng.integers(2, F.depth + 1))
        A = random_level_set(rng, F, k)
        mb = build_block_indicator(A, F, k, 64)
        assert mb.cost <= 3 * F.space.measure(A) * (1 + 1e-12)
        assert check_median_block(mb, F, np.inf)


def test_indicator_slice_bound_monotone(rng):
    for _ in range(50):
        F, _ = random_instance(rng)
        if F.depth < 2:
            continue
        k = int(rng.integers(2, F.depth + 1))
        A = random_level_set(rng, F, k)
        mA = F.space.measure(A)
        bounds = [indicator_slice_bound(A, F, k, N) for N in (4, 16, 64, 256)]
        for N, lo, hi in zip((16, 64, 256), bounds[1:], bounds[:-1]):
            assert lo <= hi + mA / (N / 4) + 1e-12


def test_weak_atom_fixture(omega4):
    wa = weak_atom(np.array([1.0, 1, 0, 0]), omega4, 2)
    np.testing.assert_allclose(wa.values, [1, 1, -1, -1], atol=1e-12)
    np.testing.assert_allclose(weak_atom(np.full(4, 0.5), omega4, 2).values, 0, atol=1e-12)
    np.testing.assert_allclose(weak_atom(np.ones(4), omega4, 3).values, 0, atol=1e-12)
    with pytest.raises(DomainError):
        weak_atom(np.array([2.0, 2, 0, 0]), omega4, 2)
    with pytest.raises(DomainError):
        weak_atom(np.array([1.0, 0, 0, 0]), omega4, 2)


def test_weak_split_fixture(omega4):
    ws = weak_atom_split(1.0, A12, omega4, 2)
    np.testing.assert_allclose(ws.a1, [0, 0, -1, -1], atol=1e-12)
    np.testing.assert_allclose(ws.a2, [1, 1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(ws.a1 + ws.a2, ws.w, atol=1e-12)
    assert ws.cost <= 6
    zero = weak_atom_split(np.zeros(4), A12, omega4, 2)
    assert zero.cost == 0
    with pytest.raises(DomainError):
        weak_atom_split(1.0, np.array([1, 0, 0, 0], bool), omega4, 2)


def test_weak_split_parent_equals_atom():
    F = Filtration([0.5, 0.5], [[0, 1], [0, 1]])
    ws = weak_atom_split(np.array([0.3, -1.0]), np.array([1, 0], bool), F, 2)
    np.testing.assert_allclose(ws.w, 0, atol=1e-12)
    np.testing.assert_allclose(ws.a1, 0, atol=1e-12)


def test_weak_split_random(rng):
    for _ in range(300):
        F, _ = random_instance(rng)
        if F.depth < 2:
            continue
        k = int(rng.integers(2, F.depth + 1))
        lab = F.level(k)
        A = lab == rng.choice(np.unique(lab))
        xi = rng.uniform(-1, 1, F.n)
        ws = weak_atom_split(xi, A, F, k)
        mA = F.space.measure(A)
        np.testing.assert_allclose(ws.a1 + ws.a2, ws.w, atol=1e-9 / mA)
        rest = F.measurable_hull(A, k - 1) & ~A
        if rest.any():
            assert np.all(np.abs(ws.a1) <= rest / F.space.measure(rest) * (1 + 1e-12) + 1e-15)
        assert np.all(np.abs(ws.a2) <= 2 * A / mA * (1 + 1e-12) + 1e-15)
        assert validate_block(ws.block, F, np.inf)[0]
        assert ws.cost <= 6 * (1 + 1e-12)
