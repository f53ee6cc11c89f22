#!/usr/bin/env python3
"""
Tests for the truncated twisted de Rham model on the flat 3-torus
"""
import math

import numpy as np
import pytest

from src.errors import PreconditionError
from src.torus_model import (
    MONOMIALS,
    TorusConfig,
    aggregate,
    boundary_leak,
    build_mode_complex,
    chirality_operator,
    cohomology_oracle,
    dual_config,
    dual_signature_defect,
    eta_trivial,
    fused_element,
    metric_family_supertrace,
    metric_grid_invariance,
    mode_lattice,
    mode_reports,
    torus_duality_chain,
    torus_rho_an,
    wedge_operator,
)

GENERIC = TorusConfig(K=1, a=(0.31, 0.17, 0.23), h=0.5)


class TestConfig:
    def test_rejects_negative_radius(self):
        with pytest.raises(ValueError):
            TorusConfig(K=-1)

    def test_rejects_non_positive_metric(self):
        with pytest.raises(ValueError):
            TorusConfig(metric=(1.0, 0.0, 1.0))

    def test_hermitian(self):
        assert GENERIC.is_hermitian
        assert not TorusConfig(a=(0.3 + 0.1j, 0, 0)).is_hermitian

    def test_dual_conjugates(self):
        dual = dual_config(TorusConfig(a=(0.3 + 0.1j, 0, 0), h=0.5 - 0.2j))
        assert dual.a[0] == 0.3 - 0.1j
        assert dual.h == 0.5 + 0.2j

    def test_to_dict(self):
        data = TorusConfig(a=(0.3 + 0.1j, 0, 0)).to_dict()
        assert data["a"][0] == [0.3, 0.1]
        assert data["metric"] == [1.0, 1.0, 1.0]


class TestExteriorAlgebra:
    def test_wedge_signs(self):
        W = wedge_operator((1,))
        assert W[MONOMIALS.index((0, 1)), MONOMIALS.index((0,))] == -1
        assert W[MONOMIALS.index((1, 2)), MONOMIALS.index((2,))] == 1
        assert not W[:, MONOMIALS.index((1,))].any()

    def test_lattice_order(self):
        lattice = mode_lattice(1)
        assert len(lattice) == 27
        assert lattice[0] == (-1, -1, -1)
        assert lattice == sorted(lattice)

    @pytest.mark.parametrize("k", [(0, 0, 0), (1, -1, 0), (-1, 1, 1)])
    def test_d_squared_vanishes(self, k):
        mode = build_mode_complex(k, TorusConfig(a=(0.3 + 0.1j, -0.2, 0.4j), h=0.7 - 0.3j))
        scale = np.linalg.norm(mode.operator) ** 2
        assert np.linalg.norm(mode.operator @ mode.operator) <= 1e-14 * scale
        mode.complex.validate()

    @pytest.mark.parametrize("metric", [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0), (0.4, 1.7, 0.9)])
    def test_chirality_is_an_involution(self, metric):
        Gam = chirality_operator(metric)
        assert np.allclose(Gam @ Gam, np.eye(8), atol=1e-14)


class TestCohomology:
    def test_zero_holonomy_with_flux(self):
        assert cohomology_oracle(TorusConfig(K=1, h=1.0)) == (3, 3)

    def test_zero_holonomy_without_flux(self):
        assert cohomology_oracle(TorusConfig(K=1)) == (4, 4)

    def test_generic_holonomy_is_acyclic(self):
        assert cohomology_oracle(GENERIC) == (0, 0)

    def test_only_the_zero_mode_carries_cohomology(self):
        mode = build_mode_complex((0, 0, 0), TorusConfig(K=0, h=1.0))
        assert not mode.is_acyclic
        assert build_mode_complex((1, 0, 0), TorusConfig(K=0, h=1.0)).is_acyclic

    def test_report_matches_oracle(self):
        report = torus_rho_an(TorusConfig(K=1, h=1.0))
        assert report.cohomology_dims == (3, 3)
        assert report.nonacyclic_modes == [(0, 0, 0)]


class TestAggregation:
    def test_generic_report(self):
        report = torus_rho_an(GENERIC)
        assert report.modes == 27
        assert report.cohomology_dims == (0, 0)
        assert report.fusion_sign == 0
        assert report.rho_an.log == pytest.approx(
            report.rho_H.log + 1j * math.pi * report.eta_trivial)

    def test_threads_give_the_same_answer(self):
        serial = torus_rho_an(GENERIC)
        threaded = torus_rho_an(GENERIC, jobs=4)
        assert threaded.rho_H.log == serial.rho_H.log
        assert threaded.xi == serial.xi

    def test_log_product_matches_fused_element(self):
        cfg = TorusConfig(K=0, a=(0.31, 0.17, 0.23), h=0.5)
        reports = mode_reports(cfg)
        assert aggregate(reports, 0).rho_H.value == pytest.approx(fused_element(reports).to_complex())

    def test_incomplete_mode_set(self):
        reports = mode_reports(TorusConfig(K=1, a=(0.31, 0.17, 0.23), h=0.5))
        with pytest.raises(PreconditionError):
            aggregate(reports[1:], 1)

    def test_unordered_mode_set(self):
        reports = mode_reports(TorusConfig(K=1, a=(0.31, 0.17, 0.23), h=0.5))
        with pytest.raises(PreconditionError):
            aggregate(list(reversed(reports)))

    def test_eta_trivial_is_half_integer(self):
        value = eta_trivial(GENERIC)
        assert (2 * value) == int(2 * value)


class TestMetricInvariance:
    def test_supertrace_vanishes_along_family(self):
        def family(t):
            return (1.3 * t, 0.8 * math.sqrt(t), 1.1)

        for t in (1.0, 1.5, 2.0):
            assert abs(metric_family_supertrace(family, t)) < 1e-12

    def test_xi_rho_low_is_metric_independent(self):
        cfg = TorusConfig(K=0, a=(0.31, 0.17, 0.23), h=0.5)
        result = metric_grid_invariance(cfg, [(1.0, 1.0, 1.0), (1.5, 1.0, 1.0), (1.0, 2.0, 0.7)])
        assert result.defect < 1e-8


class TestDuality:
    def test_signature_operator_adjoint(self):
        cfg = TorusConfig(K=1, a=(0.3 + 0.1j, 0.2, 0.1 - 0.05j), h=0.5, metric=(1.0, 1.5, 0.8))
        assert dual_signature_defect(cfg) < 1e-12

    def test_chain(self):
        cfg = TorusConfig(K=0, a=(0.3 + 0.1j, 0.2, 0.1 - 0.05j), h=0.5)
        chain = torus_duality_chain(cfg)
        assert chain.modes == 1
        assert chain.max_model_defect < 1e-12
        assert chain.max_residual < 1e-8

    def test_rho_an_relation(self):
        cfg = TorusConfig(K=0, a=(0.3 + 0.1j, 0.2, 0.1 - 0.05j), h=0.5)
        chain = torus_duality_chain(cfg)
        assert chain.rho_an_residual is not None
        assert chain.rho_an_residual < 1e-8
        assert chain.rho_an.log_modulus == pytest.approx(chain.rho_an_dual.log_modulus, abs=1e-8)


class TestBoundaryLeak:
    def test_records(self):
        records = boundary_leak(TorusConfig(K=0, a=(0.31, 0.17, 0.23), h=0.5), radii=(0, 1))
        assert [r.K for r in records] == [0, 1]
        assert records[0].leaked_mass == pytest.approx(1 / 3)
        assert records[1].leaked_mass < records[0].leaked_mass
        assert all(r.intertwining_defect < 1e-10 for r in records)

    def test_needs_acyclic_model(self):
        with pytest.raises(PreconditionError):
            boundary_leak(TorusConfig(K=0, h=1.0), radii=(0,))
