import numpy as np
import pytest

from sprify import reference_systems as refs
from sprify.descriptor import (
    DescriptorSystem,
    augmented_pencil,
    close_loop,
    eval_G,
    eval_G_inverse,
    pencil_eigenvalues,
    pencil_index,
    rank_conditions,
    sample_points,
    uncontrollable_eigenvalues,
    unobservable_eigenvalues,
    validate,
)
from sprify.errors import (
    DimensionError,
    IllPosedFeedbackError,
    InvalidInputError,
    IrregularPencilError,
    PoleError,
    SingularMatrixError,
)
from sprify.linalg import rank_tol
from sprify.random_systems import random_regular_system

from conftest import multiset_close


def test_dimension_checks():
    with pytest.raises(DimensionError):
        DescriptorSystem(np.eye(2), np.eye(3), np.ones((3, 1)), np.ones((1, 3)), [[0]])
    with pytest.raises(DimensionError):
        DescriptorSystem(np.eye(2), np.eye(2), np.ones((2, 1)), np.ones((2, 2)), [[0]])
    with pytest.raises(DimensionError):
        DescriptorSystem(np.eye(2), np.eye(2), np.ones((2, 1)), np.ones((1, 2)), np.eye(2))
    with pytest.raises(InvalidInputError):
        DescriptorSystem([[np.nan]], [[1]], [[1]], [[1]], [[0]])


def test_system_is_immutable():
    s = refs.integrator()
    with pytest.raises(ValueError):
        s.A[0, 0] = 5.0
    assert s.n == 1 and s.m == 1


def test_sample_points_deterministic():
    np.testing.assert_array_equal(sample_points(), sample_points())
    assert sample_points().size == 12


def test_validate():
    validate(refs.descriptor_2x2())
    validate(DescriptorSystem(np.zeros((2, 2)), np.eye(2), np.ones((2, 1)), np.ones((1, 2)), [[1]]))
    with pytest.raises(IrregularPencilError):
        validate(DescriptorSystem(np.zeros((2, 2)), np.zeros((2, 2)), np.ones((2, 1)),
                                  np.ones((1, 2)), [[1]]))


def test_augmented_pencil_integrator():
    p = augmented_pencil(refs.integrator())
    np.testing.assert_array_equal(p.calA, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(p.calE, [[1, 0], [0, 0]])
    np.testing.assert_array_equal(p.calB, [[0], [1]])
    np.testing.assert_array_equal(p.calC, [[0, -1]])


def test_augmented_pencil_blocks():
    s = refs.descriptor_2x2()
    p = augmented_pencil(s)
    np.testing.assert_array_equal(p.calE[:2, :2], s.E)
    assert not np.any(p.calE[2:, :]) and not np.any(p.calE[:, 2:])
    np.testing.assert_array_equal(p.calA, np.block([[s.A, s.B], [s.C, s.D]]))
    s3 = refs.unstable_inverse_2x2()
    p3 = augmented_pencil(s3)
    np.testing.assert_array_equal(p3.calA[2:, :2], s3.C)
    np.testing.assert_array_equal(p3.calE[:2, :2], np.eye(2))


def test_rank_conditions():
    assert rank_conditions(refs.integrator())
    assert rank_conditions(refs.descriptor_2x2())
    z = DescriptorSystem(np.zeros((2, 2)), np.eye(2), np.zeros((2, 1)), np.ones((1, 2)), [[1]])
    assert not rank_conditions(z)


def test_pencil_eigenvalue_examples():
    s2 = refs.descriptor_2x2()
    assert pencil_eigenvalues(s2.E, s2.A).finite_eigenvalues.size == 0
    assert multiset_close(pencil_eigenvalues(np.eye(2), np.diag([-1.0, 1.0])).finite_eigenvalues,
                          [-1, 1], 1e-12)
    p = augmented_pencil(refs.first_order_lead())
    np.testing.assert_allclose(pencil_eigenvalues(p.calE, p.calA).finite_eigenvalues, [-1.0])


def test_pencil_eigenvalues_are_near_singular_points():
    rng = np.random.default_rng(5)
    for _ in range(30):
        s = random_regular_system(rng)
        res = pencil_eigenvalues(s.E, s.A)
        for lam in res.finite_eigenvalues:
            smin = np.linalg.svd(lam * s.E - s.A, compute_uv=False)[-1]
            bound = 1e-8 * (np.linalg.norm(s.E, 2) * abs(lam) + np.linalg.norm(s.A, 2))
            assert smin <= bound


def test_pencil_eigenvalues_shift_independent():
    rng = np.random.default_rng(6)
    for _ in range(30):
        s = random_regular_system(rng)
        p = augmented_pencil(s)
        a = pencil_eigenvalues(p.calE, p.calA, shift=0.3 + 0.7j).finite_eigenvalues
        b = pencil_eigenvalues(p.calE, p.calA, shift=-1.1 - 0.4j).finite_eigenvalues
        assert multiset_close(a, b, 1e-6)


def test_pencil_index_examples():
    for build, idx in ((refs.integrator, 2), (refs.descriptor_2x2, 1),
                       (refs.singular_a_and_d, 2), (refs.first_order_lead, 1)):
        p = augmented_pencil(build())
        assert pencil_index(p.calE, p.calA) == idx
    assert pencil_index(np.zeros((2, 2)), np.eye(2)) == 1
    with pytest.raises(SingularMatrixError):
        pencil_index(np.eye(2), np.zeros((2, 2)))


def test_uncontrollable_and_unobservable():
    s4 = refs.singular_a_and_d()
    assert uncontrollable_eigenvalues(s4, [0, -1]) == []
    assert unobservable_eigenvalues(s4, [0, -1]) == []
    s = DescriptorSystem(np.eye(2), np.diag([-1.0, -2.0]), [[1.0], [0.0]], [[1.0, 0.0]], [[0.0]])
    assert uncontrollable_eigenvalues(s, [-2]) == [-2]
    assert unobservable_eigenvalues(s, [-2]) == [-2]
    assert uncontrollable_eigenvalues(s, [-1]) == []
    assert uncontrollable_eigenvalues(s, []) == []
    assert unobservable_eigenvalues(s, []) == []


def test_augmented_rank_tests_match_original():
    # uncontrollable for (E, A, B) iff [lam calE - calA, calB] loses rank; dually
    rng = np.random.default_rng(7)
    for _ in range(20):
        n, m = 3, 1
        E = np.eye(n)
        A = rng.standard_normal((n, n))
        A[2, :2] = 0.0
        B = np.vstack([rng.standard_normal((2, m)), np.zeros((1, m))])
        C = rng.standard_normal((m, n))
        s = DescriptorSystem(E, A, B, C, rng.standard_normal((m, m)))
        p = augmented_pencil(s)
        for lam in [A[2, 2], rng.standard_normal()]:
            orig = bool(uncontrollable_eigenvalues(s, [lam]))
            aug = rank_tol(np.hstack([lam * p.calE - p.calA, p.calB]), 1e-10).rank < n + m
            assert orig == aug
            orig = bool(unobservable_eigenvalues(s, [lam]))
            aug = rank_tol(np.vstack([lam * p.calE - p.calA, p.calC]), 1e-10).rank < n + m
            assert orig == aug


def test_eval_examples():
    s5 = refs.first_order_lead()
    np.testing.assert_allclose(eval_G(s5, 0), [[-0.5]])
    np.testing.assert_allclose(eval_G_inverse(s5, 0), [[-2.0]])
    s1 = refs.integrator()
    np.testing.assert_allclose(eval_G(s1, 2), [[0.5]])
    np.testing.assert_allclose(eval_G_inverse(s1, 3), [[3.0]])
    d_only = DescriptorSystem(np.eye(2), -np.eye(2), np.zeros((2, 1)), np.ones((1, 2)), [[4.0]])
    np.testing.assert_allclose(eval_G(d_only, 1.7 + 2j), [[4.0]])
    with pytest.raises(PoleError):
        eval_G(s1, 0)
    with pytest.raises(PoleError):
        eval_G_inverse(s5, -1)


def _points(rng, k=10):
    return rng.uniform(-3, 3, k) + 1j * rng.uniform(-3, 3, k)


def test_G_times_Ginv_is_identity(reference_system):
    _, s = reference_system
    rng = np.random.default_rng(8)
    for z in _points(rng):
        np.testing.assert_allclose(eval_G(s, z) @ eval_G_inverse(s, z), np.eye(s.m), atol=1e-8)


def test_close_loop_formulas():
    s5 = refs.first_order_lead()
    cl = close_loop(s5, [[-3.0]], [[1.0]])
    np.testing.assert_allclose(cl.Ac, [[-0.25]])
    s1 = refs.integrator()
    cl = close_loop(s1, [[-1.0]], [[1.0]])
    np.testing.assert_allclose([cl.Ac, cl.Bc, cl.Cc, cl.Dc], [[[-1]], [[1]], [[1]], [[0]]])
    with pytest.raises(IllPosedFeedbackError):
        close_loop(s5, [[1.0]], [[1.0]])
    with pytest.raises(DimensionError):
        close_loop(s5, np.eye(2), np.eye(2))


def test_close_loop_zero_gain_is_identity_map():
    rng = np.random.default_rng(9)
    for _ in range(10):
        s = random_regular_system(rng)
        cl = close_loop(s, np.zeros((s.m, s.m)), np.eye(s.m))
        for name, ref in (("Ac", s.A), ("Bc", s.B), ("Cc", s.C), ("Dc", s.D)):
            np.testing.assert_array_equal(getattr(cl, name), ref)
        L = rng.standard_normal((s.m, s.m))
        cl = close_loop(s, np.zeros((s.m, s.m)), L)
        np.testing.assert_allclose(cl.Cc, L @ s.C)
        np.testing.assert_allclose(cl.Dc, L @ s.D)


def test_close_loop_matches_operator_form():
    rng = np.random.default_rng(10)
    for _ in range(10):
        s = random_regular_system(rng)
        K = rng.standard_normal((s.m, s.m))
        L = rng.standard_normal((s.m, s.m))
        cl = close_loop(s, K, L)
        z = 0.4 + 1.3j
        G = eval_G(s, z)
        ref = L @ np.linalg.solve(np.eye(s.m) - G @ K, G)
        np.testing.assert_allclose(eval_G(cl.as_system(), z), ref, rtol=1e-7, atol=1e-9)
