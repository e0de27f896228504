import json

import numpy as np
import pytest

from martblocks import (CancelBlock, DomainError, H1_norm, LevelRangeError, PAtom,
                        ReconstructionError, Sigma1Block, Subatom, cond_exp,
                        davis_split, decompose_delta_indicator, decompose_H1_to_blocks,
                        duality_bound_check_p2, h1_atomic_decompose, h1_norm, mart_diff,
                        pairing, subatom_l1_bound_check, validate_atom, validate_block)
from martblocks.atoms import random_block, random_level_set
from martblocks.blocks import (block_diagnostic, block_from_dict, block_to_dict,
                               report_from_dict)
from martblocks.probability import differences
from conftest import random_instance


def test_pairing(omega4):
    assert pairing([1, -1, 0, 0], [1, 1, 0, 0], omega4) == 0.0
    A = np.array([1, 1, 0, 0.0])
    assert pairing(A, A, omega4) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        pairing([1, 2], [1, 2, 3, 4], omega4)


def test_subatom_fixtures(omega4):
    A = np.array([1, 1, 0, 0], bool)
    s = Subatom(2, 2, A, np.array([2.0, -2, 0, 0]))
    b = CancelBlock(2, (1.0,), (s,))
    assert validate_block(b, omega4, np.inf) == (True, 1.0)
    assert subatom_l1_bound_check(s, omega4)
    s3 = Subatom(2, 3, A, np.array([1.0, -1, 0, 0]))
    assert validate_block(CancelBlock(2, (1.0,), (s3,)), omega4, np.inf)[0]
    assert subatom_l1_bound_check(s3, omega4)
    # the damping factor rejects a saturated level-2 shape reused one level down
    bad = Subatom(2, 3, A, np.array([2.0, -2, 0, 0]))
    assert not validate_block(CancelBlock(2, (1.0,), (bad,)), omega4, np.inf)[0]
    assert "norm bound" in block_diagnostic(CancelBlock(2, (1.0,), (bad,)), omega4, np.inf)


def test_atom_validation(omega4):
    A = np.array([1, 1, 0, 0], bool)
    ok, _ = validate_atom(PAtom(2, A, np.array([2.0, -2, 0, 0])), omega4, np.inf)
    assert ok
    ok, why = validate_atom(PAtom(2, A, np.array([2.0, 2, 0, 0])), omega4, np.inf)
    assert not ok and why == "cancellation"
    ok, why = validate_atom(PAtom(None, np.ones(4, bool), np.full(4, 1.0)), omega4, 2.0)
    assert ok


def test_delta_indicator_fixture(omega4):
    b = decompose_delta_indicator(np.array([1, 0, 0, 0], bool), omega4, 2)
    np.testing.assert_allclose(b.values(4), [0.25, 0.25, -0.25, -0.25], atol=1e-12)
    assert b.cost == pytest.approx(0.75, abs=1e-12)
    assert b.level == 1
    terms = sorted(((c, s.values.tolist(), s.level) for c, s in b.terms), key=lambda t: t[0])
    assert terms[0][0] == pytest.approx(-0.25) and terms[0][2] == 1
    np.testing.assert_allclose(terms[0][1], [1, 1, 1, 1])
    assert terms[1][0] == pytest.approx(0.5) and terms[1][2] == 2
    np.testing.assert_allclose(terms[1][1], [1, 1, 0, 0])
    assert validate_block(b, omega4, np.inf) == (True, pytest.approx(0.75))


def test_delta_indicator_trivial_and_errors(omega4):
    b = decompose_delta_indicator(np.ones(4, bool), omega4, 2)
    assert b.cost == 0 and not b.subatoms
    with pytest.raises(LevelRangeError):
        decompose_delta_indicator(np.array([1, 0, 0, 0], bool), omega4, 1)
    with pytest.raises(DomainError):
        decompose_delta_indicator(np.zeros(4, bool), omega4, 2)


def test_delta_indicator_random(rng):
    for _ in range(200):
        F, _ = random_instance(rng, points=24, depth=5)
        if F.depth < 2:
            continue
        k = int(rng.integers(2, F.depth + 1))
        A0 = rng.random(F.n) < 0.4
        if not A0.any():
            continue
        b = decompose_delta_indicator(A0, F, k)
        np.testing.assert_allclose(b.values(F.n), mart_diff(A0.astype(float), F, k),
                                   atol=1e-9)
        assert b.cost <= 6 * F.space.measure(A0) * (1 + 1e-12)
        assert validate_block(b, F, np.inf)[0]


def test_davis_split(rng):
    for _ in range(100):
        F, f = random_instance(rng)
        f = f * np.where(rng.random(F.n) < 0.2, 30.0, 1.0)
        g, h = davis_split(f, F)
        np.testing.assert_allclose(g + h, f, atol=1e-9)
        dh = differences(h, F)
        np.testing.assert_allclose(dh[0], 0, atol=1e-9)
        for k in range(2, F.depth + 1):
            np.testing.assert_allclose(cond_exp(dh[k - 1], F, k - 1), 0, atol=1e-9)
    F = random_instance(rng)[0]
    f = np.zeros(F.n)
    f[0] = 8.0
    g, h = davis_split(cond_exp(f, F, F.depth), F)
    np.testing.assert_allclose(g + h, cond_exp(f, F, F.depth))


@pytest.mark.parametrize("p", [2.0, np.inf])
def test_h1_atomic_decompose(rng, p):
    for _ in range(60):
        F, g = random_instance(rng)
        atoms = h1_atomic_decompose(g, F, p)
        total = sum((lam * a.values for lam, a in atoms), np.zeros(F.n))
        np.testing.assert_allclose(total, g, atol=1e-9 * max(1, np.abs(g).max()))
        for lam, a in atoms:
            assert lam > 0
            assert validate_atom(a, F, p)[0], validate_atom(a, F, p)[1]


def test_h1_atomic_fixture(omega4):
    g = np.array([1.0, -1, 0, 0])
    atoms = h1_atomic_decompose(g, omega4, 2.0)
    total = sum(lam * a.values for lam, a in atoms)
    np.testing.assert_allclose(total, g, atol=1e-12)
    mass = sum(lam for lam, _ in atoms)
    assert mass / h1_norm(g, omega4) >= 1 - 1e-12


def test_decompose_fixture_against_lp(omega4):
    from martblocks import atb_norm_lp
    f = np.array([1.0, -1, 0, 0])
    rep = decompose_H1_to_blocks(f, omega4, np.inf)
    assert rep.validate(omega4)
    assert rep.cost >= H1_norm(f, omega4) - 1e-12
    assert atb_norm_lp(f, omega4) <= rep.cost + 1e-9
    assert decompose_H1_to_blocks(np.zeros(4), omega4).cost == 0


def test_decompose_single_atom(omega4):
    f = np.array([2.0, -2, 0, 0])
    assert decompose_H1_to_blocks(f, omega4, np.inf).cost <= 1 + 1e-9


@pytest.mark.parametrize("route", ["davis", "atomic", "direct", "best"])
@pytest.mark.parametrize("p", [2.0, np.inf])
def test_decompose_routes_random(rng, route, p):
    for _ in range(40):
        F, f = random_instance(rng)
        rep = decompose_H1_to_blocks(f, F, p, route)
        assert rep.validate(F)
        assert rep.cost >= 0


def test_decompose_rejects(omega4):
    with pytest.raises(DomainError):
        decompose_H1_to_blocks(np.zeros(4), omega4, np.inf, "nope")
    F = omega4.__class__([0.5, 0.5], [[0, 0]])
    with pytest.raises(DomainError):
        decompose_H1_to_blocks(np.array([1.0, 0.0]), F)


def test_report_round_trip(omega4):
    f = np.array([1.0, -1, 3, 2])
    rep = decompose_H1_to_blocks(f, omega4, 2.0)
    d = json.loads(json.dumps(rep.to_dict(omega4)))
    rep2, F2 = report_from_dict(d)
    assert rep2.cost == pytest.approx(rep.cost)
    assert rep2.validate(F2)
    for b in rep.blocks:
        b2 = block_from_dict(block_to_dict(b), 4)
        np.testing.assert_allclose(getattr(b2, "values")(4) if not isinstance(b2, Sigma1Block)
                                   else b2.values,
                                   b.values(4) if not isinstance(b, Sigma1Block) else b.values)


def test_duality_fixture(omega4):
    b = decompose_delta_indicator(np.array([1, 0, 0, 0], bool), omega4, 2)
    phi = np.array([1.0, -1, 0, 0])
    lhs, rhs = duality_bound_check_p2(b, phi, omega4)
    assert lhs == pytest.approx(abs(pairing(b.values(4), phi, omega4)))
    assert lhs <= rhs + 1e-12


def test_duality_random(rng):
    for _ in range(200):
        F, phi = random_instance(rng, measurable=False)
        k = int(rng.integers(1, F.depth + 1))
        b = random_block(rng, F, k, int(rng.integers(1, 5)), 2.0)
        assert validate_block(b, F, 2.0)[0]
        lhs, rhs = duality_bound_check_p2(b, phi, F)
        assert lhs <= rhs + 1e-9
    s1 = Sigma1Block(np.full(F.n, 2.0))
    lhs, rhs = duality_bound_check_p2(s1, phi, F)
    assert lhs <= rhs + 1e-9


def test_random_level_set(rng, omega4):
    for k in (1, 2, 3):
        A = random_level_set(rng, omega4, k)
        assert A.any() and omega4.is_measurable_set(A, k)
