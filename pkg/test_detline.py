#!/usr/bin/env python3
"""
Tests for determinant-line elements, sign exponents and the tau-duality maps
"""
import itertools

import pytest
from sympy.polys.domains import QQ_I

from src.detline import (
    BasedSpace,
    SignExponents,
    adjoint_transport,
    alpha_beta_identity,
    alpha_graded,
    alpha_line,
    beta_line,
    dual_fusion_sides,
    fuse,
    fuse_graded,
    fuse_swapped,
    graded_element,
    invert,
    line_element,
    sign_F,
    sign_M,
    sign_N,
    sign_N_phi,
    sign_R,
)
from src.errors import PreconditionError
from src.linalg_core import ExactBackend


def q(re, im=0):
    return QQ_I(re, im)


class TestSignExponents:
    @pytest.mark.parametrize("dims, expected", [((0, 0), 0), ((1, 1), 1), ((2, 2), 0)])
    def test_sign_N(self, dims, expected):
        assert sign_N(*dims) == expected

    def test_sign_M_and_R(self):
        assert sign_M(2, 3) == 0
        assert sign_M(0, 5) == 0
        assert sign_R(2) == 1
        assert sign_R(4) == 0

    def test_phi_exponent_differs_by_dimension_sum(self):
        for a0, a1 in itertools.product(range(6), repeat=2):
            assert sign_N_phi(a0, a1) == (sign_N(a0, a1) + a0 + a1) % 2

    def test_sign_F_vanishes(self):
        for a0, a1 in itertools.product(range(6), repeat=2):
            assert sign_F(a0, a1) == 0

    def test_phi_exponent_additive_over_direct_sums(self):
        for a0, a1, b0, b1 in itertools.product(range(4), repeat=4):
            expected = (sign_N_phi(a0, a1) + sign_N_phi(b0, b1) + a0 * b0 + a1 * b1) % 2
            assert sign_N_phi(a0 + b0, a1 + b1) == expected

    def test_record(self):
        record = SignExponents.for_dims(1, 1, 2, 1, 1)
        assert (record.N, record.M, record.R, record.F) == (1, 1, 1, 0)


class TestFusion:
    def test_coefficients_multiply(self):
        v = line_element(BasedSpace("V", 1), q(2))
        w = line_element(BasedSpace("W", 1), q(3))
        assert fuse(v, w).coeff == q(6)
        assert fuse_swapped(w, v).coeff == q(-6)

    def test_zero_space_is_identity(self):
        v = line_element(BasedSpace("V", 0), q(1))
        w = line_element(BasedSpace("W", 2), q(5, 1))
        assert fuse(v, w).coeff == w.coeff
        assert fuse(v, w).dims == (2,)

    def test_swap_sign_exhaustive(self):
        for m, n in itertools.product(range(5), repeat=2):
            v = line_element(BasedSpace("V", m), q(1))
            w = line_element(BasedSpace("W", n), q(1))
            assert fuse_swapped(w, v).coeff == q((-1) ** (m * n))

    @pytest.mark.parametrize("c1, d0, sign", [(1, 1, -1), (2, 1, 1), (0, 3, 1)])
    def test_graded_fusion_sign(self, c1, d0, sign):
        x = graded_element("C", 1, c1, q(1))
        y = graded_element("D", d0, 2, q(1))
        fused = fuse_graded(x, y)
        assert fused.coeff == q(sign)
        assert fused.dims == (1 + d0, c1 + 2)

    def test_graded_fusion_with_zero_complex(self):
        x = graded_element("C", 2, 1, q(3, -1))
        zero = graded_element("D", 0, 0, q(1))
        assert fuse_graded(x, zero).coeff == x.coeff


class TestTauDuality:
    def test_alpha_conjugates(self):
        x = line_element(BasedSpace("V*", 1), q(0, 2))
        image = alpha_line(x)
        assert image.coeff == q(0, -2)
        assert image.word[0][1] == -1
        assert image.word[0][0].identifier == "V"

    def test_alpha_unit(self):
        assert alpha_line(line_element(BasedSpace("V*", 1), q(1))).coeff == q(1)

    def test_beta_sign(self):
        assert beta_line(line_element(BasedSpace("V", 1), q(1))).coeff == q(-1)

    def test_alpha_beta_identity_all_dims(self):
        for dim in range(4):
            left, right = alpha_beta_identity(line_element(BasedSpace("V", dim), q(2, 3)))
            assert left == right

    def test_invert_rejects_zero(self):
        with pytest.raises(PreconditionError):
            invert(line_element(BasedSpace("V", 1), q(0)))

    @pytest.mark.parametrize("dims, expected", [((1, 1), 1), ((0, 0), 1), ((2, 1), 1), ((1, 0), -1), ((1, 2), -1)])
    def test_alpha_graded_sign(self, dims, expected):
        image = alpha_graded(graded_element("V", dims[0], dims[1], q(1)))
        assert image.coeff == q(expected)
        assert image.dims == (dims[1], dims[0])

    def test_alpha_graded_is_conjugate_linear(self):
        image = alpha_graded(graded_element("V", 2, 2, q(1, 1)))
        assert image.coeff == q(1, -1)

    def test_dual_fusion_identity(self):
        for m, n in itertools.product(range(4), repeat=2):
            v = line_element(BasedSpace("V", m), q(m + 1, -2))
            w = line_element(BasedSpace("W", n), q(3, n))
            left, right = dual_fusion_sides(v, w)
            assert left == right


class TestAdjointTransport:
    def test_identity_and_scaling(self):
        be = ExactBackend()
        v = line_element(BasedSpace("V", 1), q(1))
        assert adjoint_transport(be.eye(1), v, be) == q(1)
        assert adjoint_transport(be.matrix([[2]]), v, be) == q(1)

    def test_swap(self):
        be = ExactBackend()
        v = line_element(BasedSpace("V", 2), q(4, -7))
        assert adjoint_transport(be.matrix([[0, 1], [1, 0]]), v, be) == q(1)

    def test_complex_map(self):
        be = ExactBackend()
        v = line_element(BasedSpace("V", 2), q(1, 1))
        T = be.matrix([[(1, 2), 1], [0, (0, 3)]])
        assert adjoint_transport(T, v, be) == q(1)

    def test_singular_map(self):
        be = ExactBackend()
        v = line_element(BasedSpace("V", 2), q(1))
        with pytest.raises(PreconditionError):
            adjoint_transport(be.matrix([[1, 2], [2, 4]]), v, be)
