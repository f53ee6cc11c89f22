#!/usr/bin/env python3
"""
Tests for Z2-graded complexes, phi, the refined torsion, direct sums, variation and duality
"""
import numpy as np
import pytest
from sympy.polys.domains import QQ, QQ_I

from src.detline import graded_element
from src.errors import PreconditionError
from src.lab_runner import hand_fixture
from src.linalg_core import ExactBackend, FloatBackend
from src.random_complex import (
    SplitMix64,
    chirality_path,
    random_complex,
    random_invertible,
    random_unitary_complex,
)
from src.z2complex import (
    Chirality,
    Z2Complex,
    c_gamma,
    cohomology,
    connection_dual,
    decompose,
    direct_sum,
    direct_sum_phi_check,
    direct_sum_torsion_check,
    dual_complex,
    duality_residual,
    phi_iso,
    refined_torsion,
    shear_decomposition,
    supertrace,
    variation_slope,
)


def one_plus_one(be):
    return Z2Complex(be.matrix([[2]]), be.matrix([[0]]), backend=be), Chirality(be.eye(1), be.eye(1))


class TestComplex:
    def test_shapes_are_checked(self):
        with pytest.raises(PreconditionError):
            Z2Complex(np.zeros((2, 3)), np.zeros((2, 3)))

    def test_d_squared(self):
        cx = Z2Complex(np.array([[1.0]]), np.array([[1.0]]))
        with pytest.raises(PreconditionError):
            cx.validate()

    def test_chirality_must_be_involution(self):
        with pytest.raises(PreconditionError):
            Chirality(np.eye(2), 2 * np.eye(2)).validate(FloatBackend())

    def test_as_float_keeps_entries(self):
        cx, gamma = hand_fixture("exact")
        f = cx.as_float()
        assert np.allclose(f.d0, np.diag([2, 0]))
        assert np.allclose(gamma.as_float().g0, np.eye(2))


class TestDecomposition:
    def test_hand_fixture_dims(self):
        cx, _ = hand_fixture("exact")
        dec = decompose(cx)
        assert dec.dims(cx.backend, 0) == (1, 0, 1)
        assert dec.dims(cx.backend, 1) == (1, 0, 1)
        assert cohomology(cx).dims == (0, 0)

    def test_random_cohomology_dims(self):
        cx = random_complex(3, 3, 1, 1, seed=5).complex
        assert cohomology(cx).dims == (1, 1)
        assert cx.euler_characteristic == 0

    def test_unequal_dims(self):
        cx = random_complex(3, 2, 1, 0, seed=8, with_chirality=False).complex
        assert cohomology(cx).dims == (2, 1)


class TestPhiAndTorsion:
    def test_phi_of_unit_on_one_plus_one(self):
        be = ExactBackend()
        cx, _ = one_plus_one(be)
        image = phi_iso(cx, None, graded_element("C", 1, 1, QQ_I.one))
        assert image.coeff == QQ_I(-2, 0)

    def test_refined_torsion_one_plus_one(self):
        be = ExactBackend()
        cx, gamma = one_plus_one(be)
        assert refined_torsion(cx, gamma).coeff == QQ_I(2, 0)

    def test_hand_fixture_exact(self):
        cx, gamma = hand_fixture("exact")
        assert refined_torsion(cx, gamma).coeff == QQ_I(QQ(-2, 3), 0)

    def test_hand_fixture_float(self):
        cx, gamma = hand_fixture("float")
        assert refined_torsion(cx, gamma).to_complex() == pytest.approx(-2 / 3)

    def test_phi_rejects_wrong_line(self):
        cx, _ = hand_fixture("exact")
        with pytest.raises(PreconditionError):
            phi_iso(cx, None, graded_element("C", 1, 2, QQ_I.one))

    def test_c_gamma_needs_square_chirality(self):
        cx = random_complex(3, 2, 1, 0, seed=2, with_chirality=False).complex
        with pytest.raises(PreconditionError):
            c_gamma(cx, Chirality(np.eye(2), np.eye(2)))

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_phi_independent_of_decomposition(self, seed):
        cx = random_complex(3, 3, 1, 1, seed=seed).complex
        be = cx.backend
        rng = SplitMix64(seed + 100)
        dec = decompose(cx)
        X, S, T, U = [], [], [], []
        for k in (0, 1):
            b, h, a = dec.dims(be, k)
            X.append(be.matrix([[(rng.integer(-2, 2), rng.integer(-2, 2)) for _ in range(a)]
                                for _ in range(b + h)], (b + h, a)))
            S.append(random_invertible(rng, be, h))
            T.append(be.matrix([[(rng.integer(-2, 2), 0) for _ in range(h)] for _ in range(b)], (b, h)))
            U.append(random_invertible(rng, be, a))
        sheared = shear_decomposition(cx, dec, X, S, T, U)
        reference = cohomology(cx, dec)
        c = graded_element("C", 3, 3, QQ_I(2, -1))
        assert phi_iso(cx, dec, c, reference).coeff == phi_iso(cx, sheared, c, reference).coeff

    def test_scaling_c0_leaves_torsion_fixed(self):
        model = random_complex(2, 2, 1, 0, seed=12)
        from src.detline import BasedSpace, line_element
        c0 = line_element(BasedSpace("C0", 2), QQ_I(3, 4))
        assert refined_torsion(model.complex, model.gamma, c0).coeff == refined_torsion(model.complex, model.gamma).coeff


class TestDirectSums:
    def test_phi_needs_zero_euler_characteristic(self):
        be = ExactBackend()
        cx = Z2Complex(be.zeros(1, 2), be.zeros(2, 1), backend=be)
        cy, _ = one_plus_one(be)
        with pytest.raises(PreconditionError):
            direct_sum_phi_check(cx, cy, graded_element("C", 2, 1, QQ_I.one), graded_element("D", 1, 1, QQ_I.one))

    def test_phi_fuses(self):
        cx = random_complex(2, 2, 1, 0, seed=3).complex
        cy = random_complex(3, 3, 1, 1, seed=4).complex
        check = direct_sum_phi_check(cx, cy, graded_element("C", 2, 2, QQ_I(1, 1)),
                                     graded_element("D", 3, 3, QQ_I(0, 2)))
        assert check.residual == QQ_I.zero

    def test_torsion_fuses(self):
        x = random_complex(2, 2, 1, 1, seed=6)
        y = random_complex(3, 3, 2, 1, seed=7)
        check = direct_sum_torsion_check(x.complex, x.gamma, y.complex, y.gamma)
        assert check.residual == QQ_I.zero

    def test_direct_sum_dims(self):
        x = random_complex(2, 2, 1, 0, seed=1).complex
        y = random_complex(1, 3, 1, 0, seed=1, with_chirality=False).complex
        total = direct_sum(x, y)
        assert (total.n0, total.n1) == (3, 5)


class TestVariation:
    def test_supertrace(self):
        be = ExactBackend()
        assert supertrace(be.matrix([[1, 0], [0, 2]]), be.matrix([[3]]), be) == QQ_I.zero
        assert supertrace(np.eye(2), np.zeros((1, 1))) == 2

    def test_residual_slope_is_two(self):
        model = random_complex(3, 3, 1, 1, seed=21).as_float()
        slope, results = variation_slope(chirality_path(model.gamma, 21), model.complex, 0.0)
        assert slope == pytest.approx(2.0, abs=0.1)
        assert results[-1].relative_residual < 1e-6


class TestDuality:
    @pytest.mark.parametrize("dims", [(2, 2, 1, 0), (3, 3, 1, 1), (3, 3, 1, 2), (4, 4, 1, 1)])
    def test_exact_duality(self, dims):
        model = random_complex(*dims, seed=sum(dims))
        check = duality_residual(model.complex, model.gamma)
        assert check.alpha_residual == QQ_I.zero

    def test_dual_complex_dims(self):
        cx = random_complex(3, 2, 1, 1, seed=9, with_chirality=False).complex
        dual = dual_complex(cx)
        assert (dual.n0, dual.n1) == (2, 3)
        assert cohomology(dual).dims == tuple(reversed(cohomology(cx).dims))

    def test_unitary_duality_with_riesz(self):
        model = random_unitary_complex(3, 1, 1, seed=11)
        check = duality_residual(model.complex, model.gamma)
        assert check.riesz_torsion is not None
        assert check.max_relative() < 1e-10

    def test_connection_dual_is_a_complex(self):
        model = random_complex(3, 3, 1, 1, seed=13, with_metric=True).as_float()
        connection_dual(model.complex, model.gamma).validate()
