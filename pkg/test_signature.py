#!/usr/bin/env python3
"""
Tests for the signature operator, graded determinants, eta and the cut-independent torsion
"""
import math

import numpy as np
import pytest

from src.errors import CutThroughClusterError, PreconditionError
from src.lab_runner import hand_fixture
from src.random_complex import random_complex, random_flux_generator
from src.signature import (
    TorsionScalar,
    build_signature,
    detgr_multiplicativity,
    eta_identity_check,
    eta_invariant,
    eta_jump_tracker,
    flux_variation_check,
    graded_det,
    log_graded_det,
    pm_split,
    rho_an,
    rho_H,
    rho_H_spread,
    small_eigenvalue_parity,
    torsion_report,
    xi_window,
)
from src.z2complex import Chirality, Z2Complex, cohomology, refined_torsion


@pytest.fixture
def hand():
    return hand_fixture("float")


@pytest.fixture
def acyclic():
    model = random_complex(4, 4, 2, 2, seed=3).as_float()
    return model.complex, model.gamma


class TestTorsionScalar:
    def test_round_trip_value(self):
        z = -2 / 3 + 0j
        s = TorsionScalar.from_complex(z)
        assert s.value == pytest.approx(z)
        assert s.wrapped_phase == pytest.approx(math.pi)

    def test_product_adds_logs(self):
        a = TorsionScalar.from_log(complex(0.5, 1.0))
        b = TorsionScalar.from_log(complex(-0.25, 3.0))
        assert (a * b).log == pytest.approx(complex(0.25, 4.0))


class TestHandFixture:
    def test_signature_blocks(self, hand):
        sig = build_signature(*hand)
        assert np.allclose(sig.B0, np.diag([2, 3]))
        assert sig.window_dims(0) == (2, 2)

    def test_pm_split_counts(self, hand):
        sig = build_signature(*hand, [0.0])
        _, _, d_minus = pm_split(sig, 1)
        assert d_minus == (1, 1)

    def test_graded_determinant(self, hand):
        sig = build_signature(*hand, [0.0])
        ldet = log_graded_det(sig, 1, -math.pi / 2)
        assert ldet == pytest.approx(complex(math.log(2) - math.log(3), -math.pi), abs=1e-12)
        assert graded_det(sig, 1).value == pytest.approx(-2 / 3)

    def test_xi_and_eta(self, hand):
        sig = build_signature(*hand, [0.0])
        assert xi_window(sig, 1, -math.pi / 2) == pytest.approx(math.log(2 / 3), abs=1e-12)
        check = eta_identity_check(sig, 1)
        assert check.eta.eta == 1.0
        assert check.d_minus == (1, 1)
        assert check.ldet == pytest.approx(complex(math.log(2 / 3), -math.pi), abs=1e-12)
        assert check.residual < 1e-12

    def test_eta_identity_rejects_theta_outside_quarter(self, hand):
        sig = build_signature(*hand, [0.0])
        with pytest.raises(PreconditionError):
            eta_identity_check(sig, 1, theta=-2.0)

    def test_rho_H_matches_refined_torsion(self, hand):
        report = torsion_report(*hand, 0.0)
        assert report.rho_H.to_complex() == pytest.approx(-2 / 3)
        assert report.cohomology_dims == (0, 0)

    def test_low_window_at_cut_five(self, hand):
        report = torsion_report(*hand, 5.0)
        assert report.rho_low.to_complex() == pytest.approx(2.0)
        assert report.det_gr.value == pytest.approx(-1 / 3)
        assert report.rho_H.to_complex() == pytest.approx(-2 / 3)

    def test_cut_independence(self, hand):
        assert rho_H_spread(*hand, [0.0, 1.0, 5.0]) < 1e-12

    def test_cut_through_cluster(self, hand):
        with pytest.raises(CutThroughClusterError):
            rho_H(*hand, 4.0)

    def test_multiplicativity(self, hand):
        assert detgr_multiplicativity(*hand, 1.0, 5.0) < 1e-12

    def test_rho_an_phase(self, hand):
        value = rho_an(*hand, 0.0, eta_trivial=0.5).to_complex()
        assert value == pytest.approx(-2j / 3)


class TestEta:
    def test_real_spectrum(self):
        result = eta_invariant(np.diag([1.0, 2.0, -3.0]))
        assert (result.eta0, result.twice_eta) == (1, 1)
        assert result.eta == 0.5

    def test_imaginary_axis_and_zero(self):
        result = eta_invariant(np.diag([1j, -1j, 0.0, 1j]))
        assert (result.m_plus, result.m_minus, result.m_zero) == (2, 1, 1)
        assert result.twice_eta == 2

    def test_near_axis_warning(self):
        result = eta_invariant(np.diag([1e-8 + 1j]))
        assert result.eta0 == 1
        assert result.warnings

    def test_sum(self):
        total = eta_invariant(np.diag([1.0])) + eta_invariant(np.diag([-1j]))
        assert total.twice_eta == 0

    def test_empty(self):
        assert eta_invariant(np.zeros((0, 0))).eta == 0.0


class TestRandomComplexes:
    def test_refined_torsion_equals_graded_determinant(self, acyclic):
        cx, gamma = acyclic
        rho = refined_torsion(cx, gamma).to_complex()
        report = torsion_report(cx, gamma, 0.0)
        assert abs(report.det_gr.value - rho) <= 1e-9 * abs(rho)

    def test_split_needs_invertible_window(self):
        model = random_complex(3, 3, 1, 1, seed=5).as_float()
        sig = build_signature(model.complex, model.gamma)
        with pytest.raises(PreconditionError):
            pm_split(sig, 0)

    def test_non_acyclic_report(self):
        model = random_complex(3, 3, 1, 1, seed=5).as_float()
        reference = cohomology(model.complex)
        report = torsion_report(model.complex, model.gamma, 0.0, reference=reference)
        rho = refined_torsion(model.complex, model.gamma, reference=reference).to_complex()
        assert report.cohomology_dims == (1, 1)
        assert abs(report.rho_H.to_complex() - rho) <= 1e-9 * abs(rho)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4])
    def test_eta_identity_and_parity(self, seed):
        model = random_complex(3, 3, 2, 1, seed=seed).as_float()
        sig = build_signature(model.complex, model.gamma, [0.0])
        assert eta_identity_check(sig, 1).residual < 1e-9
        assert small_eigenvalue_parity(sig).holds


class TestFluxVariation:
    def test_supertraceless_flux_is_invisible(self, acyclic):
        cx, gamma = acyclic
        beta = random_flux_generator(5, 4, 4, 0.0)
        run = flux_variation_check(cx, gamma, beta, 0.0)
        assert abs(run.drift) < 1e-7
        assert run.ledger_residual < 1e-10

    def test_drift_is_minus_supertrace(self, acyclic):
        cx, gamma = acyclic
        beta = random_flux_generator(6, 4, 4, 5.0)
        run = flux_variation_check(cx, gamma, beta, 0.0)
        assert abs(run.drift + 5.0) / 5.0 < 1e-3

    def test_window_identities_with_a_low_window(self, hand):
        beta = random_flux_generator(7, 2, 2, 1.0, scale=0.05)
        run = flux_variation_check(*hand, beta, 5.0)
        assert max(run.residuals) < 1e-6
        assert abs(run.drift + 1.0) < 1e-6

    def test_beta_must_preserve_grading(self, hand):
        with pytest.raises(PreconditionError):
            flux_variation_check(*hand, (np.eye(3), np.eye(2)), 0.0)


class TestEtaTracking:
    def test_records_every_parameter(self):
        def family(t):
            d0 = np.array([[1.0 + t, 0], [0, 0]])
            d1 = np.array([[0, 0], [0, 2.0]])
            return Z2Complex(d0, d1), Chirality(np.eye(2), np.eye(2))

        track = eta_jump_tracker(family, [0.0, 0.5, 1.0], 0.0)
        assert track.parameters == [0.0, 0.5, 1.0]
        assert track.twice_eta == [2, 2, 2]
        assert track.crossings == []
