#!/usr/bin/env python3
"""
Tests for the seeded complex generator and the text formats for complexes
"""
import numpy as np
import pytest
from sympy.polys.domains import QQ, QQ_I

from src.errors import PreconditionError
from src.lab_runner import hand_fixture
from src.linalg_core import ExactBackend, FloatBackend
from src.matrix_io import load_complex, read_complex, read_matrix, write_complex, write_matrix
from src.random_complex import (
    SplitMix64,
    chirality_path,
    exact_suite_dims,
    random_complex,
    random_flux_generator,
    random_unitary_complex,
)
from src.z2complex import cohomology


class TestSplitMix64:
    def test_reference_output(self):
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_ranges(self):
        rng = SplitMix64(42)
        draws = [rng.integer(-2, 2) for _ in range(200)]
        assert set(draws) == {-2, -1, 0, 1, 2}
        assert all(0.0 <= rng.uniform() < 1.0 for _ in range(200))


class TestRandomComplex:
    def test_same_seed_same_complex(self):
        a = random_complex(3, 3, 1, 1, seed=7).complex
        b = random_complex(3, 3, 1, 1, seed=7).complex
        be = a.backend
        assert be.rows(a.d0) == be.rows(b.d0)
        assert be.rows(a.d1) == be.rows(b.d1)

    @pytest.mark.parametrize("dims", [(3, 3, 1, 1), (3, 3, 2, 1), (4, 3, 1, 2), (2, 3, 0, 2)])
    def test_ranks_and_exact_d_squared(self, dims):
        n0, n1, r0, r1 = dims
        cx = random_complex(*dims, seed=1, with_chirality=False).complex
        cx.validate()
        assert cohomology(cx).dims == (n0 - r0 - r1, n1 - r0 - r1)

    def test_chirality_is_exact_involution(self):
        model = random_complex(3, 3, 1, 1, seed=2)
        model.gamma.validate(model.complex.backend)

    def test_metric_is_positive(self):
        cx = random_complex(2, 2, 1, 0, seed=3, with_metric=True).as_float().complex
        assert np.all(np.linalg.eigvalsh(np.asarray(cx.metric(0))) > 0)

    def test_impossible_ranks(self):
        with pytest.raises(PreconditionError):
            random_complex(2, 2, 2, 1, seed=1)

    def test_chirality_needs_equal_dims(self):
        with pytest.raises(PreconditionError):
            random_complex(3, 2, 1, 0, seed=1)

    def test_unitary_chirality(self):
        model = random_unitary_complex(3, 1, 1, seed=4)
        g0 = model.gamma.g0
        assert np.allclose(g0 @ g0.conj().T, np.eye(3))
        assert model.gamma.is_unitary(model.complex)

    def test_flux_supertrace(self):
        b0, b1 = random_flux_generator(9, 3, 2, supertrace=5.0)
        assert np.trace(b0) - np.trace(b1) == pytest.approx(5.0)

    def test_chirality_path_starts_at_gamma(self):
        model = random_complex(3, 3, 1, 1, seed=5)
        family = chirality_path(model.gamma, 5)
        assert np.allclose(family(0.0).g0, model.gamma.as_float().g0)
        g = family(0.1)
        assert np.allclose(g.g0 @ g.g1, np.eye(3))

    def test_suite_dims(self):
        assert exact_suite_dims(1) == [(0, 0, 0, 0), (0, 1, 0, 0), (1, 0, 0, 0),
                                       (1, 1, 0, 0), (1, 1, 0, 1), (1, 1, 1, 0)]


class TestMatrixText:
    def test_float_matrix(self):
        A = read_matrix("# comment\n2 2\n1 2,1\n\n0 -1.5,0\n")
        assert np.array_equal(A, np.array([[1, 2 + 1j], [0, -1.5]]))

    def test_exact_fractions(self):
        be = ExactBackend()
        A = read_matrix("1 2\n1/2,0 3,-2/3", be)
        assert be.rows(A) == [[QQ_I(QQ(1, 2), 0), QQ_I(3, QQ(-2, 3))]]

    def test_write_exact(self):
        be = ExactBackend()
        text = write_matrix(be.matrix([[(1, 0), 0]]), be)
        assert text == "1 2\n1,0 0,0\n"

    def test_short_matrix(self):
        with pytest.raises(PreconditionError):
            read_matrix("2 2\n1 2 3")

    def test_bad_entry(self):
        with pytest.raises(PreconditionError):
            read_matrix("1 1\nx")


class TestComplexText:
    def test_exact_round_trip_with_chirality(self):
        cx, gamma = hand_fixture("exact")
        text = write_complex(cx, gamma)
        assert text.splitlines()[0] == "2 2 0 1"
        cy, gy = read_complex(text, ExactBackend())
        be = cx.backend
        assert be.rows(cy.d0) == be.rows(cx.d0)
        assert be.rows(cy.d1) == be.rows(cx.d1)
        assert be.rows(gy.g1) == be.rows(gamma.g1)

    def test_metric_flag(self):
        text = "1 1 1\n1 1\n2\n1 1\n0\n1 1\n1\n1 1\n4\n"
        cx, gamma = read_complex(text, FloatBackend())
        assert gamma is None
        assert cx.has_metric
        assert cx.metric(1)[0, 0] == 4

    def test_bad_header(self):
        with pytest.raises(PreconditionError):
            read_complex("2 2\n", FloatBackend())

    def test_header_mismatch(self):
        with pytest.raises(PreconditionError):
            read_complex("2 2 0\n1 1\n0\n1 1\n0\n", FloatBackend())

    def test_load_from_file(self, tmp_path):
        cx, gamma = hand_fixture("exact")
        path = tmp_path / "hand.cx"
        path.write_text(write_complex(cx, gamma))
        loaded, loaded_gamma = load_complex(str(path), "exact")
        assert loaded.backend.exact
        assert loaded_gamma is not None

    def test_missing_file(self, tmp_path):
        with pytest.raises(PreconditionError):
            load_complex(str(tmp_path / "missing.cx"))
