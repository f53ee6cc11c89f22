"""
Command implementations behind the CLI

Every command returns a report dict: inputs echo, results, a suite table with residuals
and tolerances, and the overall pass flag. Reports carry no timestamps so identical
configs give identical bytes.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.domains import QQ_I

from . import __version__
from .detline import (
    BasedSpace,
    adjoint_transport,
    alpha_beta_identity,
    as_complex,
    dual_fusion_sides,
    graded_element,
    line_element,
    sign_N,
    sign_N_phi,
    sign_R,
)
from .errors import CutThroughClusterError, PreconditionError
from .linalg_core import ExactBackend, get_backend
from .matrix_io import load_complex
from .report_store import REPORT_VERSION
from .random_complex import (
    SplitMix64,
    chirality_path,
    exact_suite_dims,
    random_complex,
    random_flux_generator,
    random_invertible,
    random_unitary_complex,
)
from .rs_metric import mathai_wu_element, norm_duality_check, rs_duality_check, rs_metric_norm, rs_norm_of_rho_an
from .run_config import Command, DeformMode, ModelKind, RunConfig, ThetaPolicy
from .signature import (
    build_signature,
    detgr_multiplicativity,
    eta_identity_check,
    eta_jump_tracker,
    flux_variation_check,
    graded_det,
    rho_H_spread,
    small_eigenvalue_parity,
    torsion_angle,
    torsion_report,
)
from .torus_model import (
    TorusConfig,
    boundary_leak,
    build_mode_complex,
    chirality_operator,
    cohomology_oracle,
    dual_signature_defect,
    metric_family_supertrace,
    metric_grid_invariance,
    mode_lattice,
    torus_duality_chain,
    torus_rho_an,
)
from .z2complex import (
    Chirality,
    Z2Complex,
    cohomology,
    decompose,
    direct_sum_torsion_check,
    duality_residual,
    phi_iso,
    refined_torsion,
    shear_decomposition,
    variation_slope,
)

logger = logging.getLogger(__name__)

FLUX_STEPS = (1e-4, 5e-5, 2.5e-5)
METRIC_GRID = 9
SignRule = Callable[[int, int], int]


@dataclass
class Suite:
    """Worst residual over a family of cases and the smallest failing case"""
    name: str
    tolerance: float
    residual: float = 0.0
    cases: int = 0
    case: Optional[Dict] = None

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def record(self, residual: float, case: Optional[Dict] = None) -> None:
        residual = float(residual)
        if not math.isfinite(residual):
            residual = math.inf
        self.cases += 1
        if residual > self.tolerance and (self.case is None or _case_size(case) < _case_size(self.case)):
            self.case = case
        self.residual = max(self.residual, residual)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "cases": self.cases,
            "case": self.case,
        }


def _case_size(case: Optional[Dict]) -> int:
    if not case:
        return 0
    return sum(int(case.get(k, 0)) for k in ("n0", "n1", "a0", "a1", "dim"))


def hand_fixture(backend_name: str = "float") -> Tuple[Z2Complex, Chirality]:
    """d0 = diag(2, 0), d1 = diag(0, 3), Gamma = identity"""
    be = get_backend(backend_name)
    d0 = be.matrix([[2, 0], [0, 0]])
    d1 = be.matrix([[0, 0], [0, 3]])
    return Z2Complex(d0, d1, backend=be, name="hand"), Chirality(be.eye(2), be.eye(2))


def sign_F_with(rule: SignRule, a0: int, a1: int) -> int:
    return (sign_R(a0 + a1) + a0 * a1 + rule(a0, a1) + a1) % 2


def _relative(a: complex, b: complex) -> float:
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


def gap_cuts(cx: Z2Complex, gamma: Chirality, count: int = 3, min_ratio: float = 1.5) -> List[float]:
    """Cuts at geometric midpoints of well separated gaps in the spectrum of B^2"""
    sig = build_signature(cx, gamma)
    moduli = np.sort(np.abs(np.concatenate([np.linalg.eigvals(sig.B0 @ sig.B0), np.linalg.eigvals(sig.B1 @ sig.B1)])))
    moduli = moduli[moduli > 1e-8 * max(1.0, float(moduli[-1]) if moduli.size else 1.0)]
    cuts = [0.0]
    for lo, hi in zip(moduli[:-1], moduli[1:]):
        if hi > min_ratio * lo and len(cuts) < count:
            cuts.append(float(math.sqrt(lo * hi)))
    if moduli.size and len(cuts) < count:
        cuts.append(float(moduli[-1]) * 2.0)
    return cuts[:count]


class LabRunner:
    """Runs one configured command and assembles its report"""

    def __init__(self, config: RunConfig, sign_rule: SignRule = sign_N_phi):
        self.config = config
        self.tol = config.tolerances
        self.sign_rule = sign_rule
        self.warnings: List[str] = []

    # -- plumbing --------------------------------------------------------

    def run(self) -> Dict:
        handlers = {
            Command.VERIFY: self.cmd_verify,
            Command.TORSION: self.cmd_torsion,
            Command.TORUS: self.cmd_torus,
            Command.DEFORM: self.cmd_deform,
            Command.DUAL: self.cmd_dual,
            Command.RSNORM: self.cmd_rsnorm,
            Command.LEAK: self.cmd_leak,
        }
        logger.info("Running %s (%s)", self.config.command.value, self.config.name)
        results, suites = handlers[self.config.command]()
        return self._report(results, suites)

    def _report(self, results: Dict, suites: Sequence[Suite]) -> Dict:
        seed = self.config.random.seed if self.config.random is not None else None
        return {
            "version": REPORT_VERSION,
            "lab_version": __version__,
            "command": self.config.command.value,
            "config": self.config.to_dict(),
            "seed": seed,
            "results": results,
            "suites": [s.to_dict() for s in suites],
            "passed": all(s.passed for s in suites),
            "warnings": list(self.warnings),
        }

    def _warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)

    def torus_config(self) -> TorusConfig:
        if self.config.torus is None:
            raise PreconditionError(f"Command '{self.config.command.value}' needs a torus model here")
        return self.config.torus.to_config()

    def load_model(self) -> Tuple[Z2Complex, Chirality]:
        """The configured complex and chirality on the configured backend"""
        kind = self.config.model
        backend = self.config.backend.value
        if kind == ModelKind.HAND:
            cx, gamma = hand_fixture(backend)
        elif kind == ModelKind.RANDOM:
            spec = self.config.random
            if spec.unitary:
                model = random_unitary_complex(spec.n0, spec.r0, spec.r1, spec.seed, spec.radius)
            else:
                model = random_complex(spec.n0, spec.n1, spec.r0, spec.r1, spec.seed, spec.radius,
                                       with_chirality=spec.n0 == spec.n1, with_metric=spec.with_metric)
                if backend == "float":
                    model = model.as_float()
            cx, gamma = model.complex, model.gamma
        elif kind == ModelKind.FILE:
            cx, gamma = load_complex(self.config.path, backend)
        else:
            raise PreconditionError("Torus models run through the torus, deform, dual, rsnorm and leak commands")
        if gamma is None:
            raise PreconditionError("The model has no chirality (needs n0 = n1 and a chirality block)")
        cx.validate()
        gamma.validate(cx.backend)
        return cx, gamma

    def _theta(self, cx: Z2Complex, gamma: Chirality, cut: float) -> Optional[float]:
        policy = self.config.theta
        if policy == ThetaPolicy.EXPLICIT:
            return self.config.theta_value
        if policy == ThetaPolicy.LOW_EDGE:
            sig = build_signature(cx, gamma, [cut])
            return torsion_angle(sig, [sig.window_count - 1], policy="low_edge").theta
        return None

    # -- verify ----------------------------------------------------------

    def cmd_verify(self) -> Tuple[Dict, List[Suite]]:
        suites = self._sign_suites() + self._exact_suites()
        if not self.config.backend.value == "exact":
            suites += self._float_suites()
        failing = [s.name for s in suites if not s.passed]
        results = {"suites_run": len(suites), "failing": failing}
        return results, suites

    def _sign_suites(self) -> List[Suite]:
        F = Suite("sign exponent F vanishes", 0.0)
        N = Suite("N_phi = N + a0 + a1", 0.0)
        for total in range(7):
            for a0 in range(min(total, 3) + 1):
                a1 = total - a0
                if a1 > 3:
                    continue
                case = {"a0": a0, "a1": a1}
                F.record(sign_F_with(self.sign_rule, a0, a1), case)
                N.record(abs(self.sign_rule(a0, a1) - (sign_N(a0, a1) + a0 + a1) % 2), case)
        additive = Suite("N_phi additive over direct sums", 0.0)
        for a0, a1, b0, b1 in itertools.product(range(4), repeat=4):
            expected = (self.sign_rule(a0, a1) + self.sign_rule(b0, b1) + a0 * b0 + a1 * b1) % 2
            additive.record(abs(self.sign_rule(a0 + b0, a1 + b1) - expected),
                            {"a0": a0, "a1": a1, "n0": b0, "n1": b1})
        ab = Suite("alpha/beta line identity", 0.0)
        fusion = Suite("dual fusion identity", 0.0)
        transport = Suite("adjoint transport", 0.0)
        be = ExactBackend()
        rng = SplitMix64(self.config.random.seed if self.config.random else 0)
        for dim in range(4):
            v = line_element(BasedSpace("V", dim), QQ_I(rng.integer(1, 5), rng.integer(-3, 3)))
            w = line_element(BasedSpace("W", 3 - dim), QQ_I(rng.integer(1, 5), rng.integer(-3, 3)))
            left, right = alpha_beta_identity(v)
            ab.record(abs(as_complex(left - right)), {"dim": dim})
            left, right = dual_fusion_sides(v, w)
            fusion.record(abs(as_complex(left - right)), {"dim": dim})
            if dim == 0:
                continue
            T = random_invertible(rng, be, dim)
            transport.record(abs(as_complex(adjoint_transport(T, v, be)) - 1), {"dim": dim})
        return [F, N, additive, ab, fusion, transport]

    def _exact_seeds(self, tuples: int) -> int:
        return max(1, math.ceil(self.config.count / max(tuples, 1)))

    def _exact_suites(self) -> List[Suite]:
        phi = Suite("phi independent of the decomposition", 0.0)
        dsum = Suite("direct-sum torsion fusion", 0.0)
        dual = Suite("duality rho_Gamma* = alpha(rho_Gamma) (exact)", 0.0)
        be = ExactBackend()
        dims = exact_suite_dims(3)
        base_seed = self.config.random.seed if self.config.random else 0
        per_tuple = self._exact_seeds(len(dims))
        previous = None
        for index, (n0, n1, r0, r1) in enumerate(dims):
            for j in range(per_tuple):
                seed = base_seed * 100003 + index * per_tuple + j
                case = {"n0": n0, "n1": n1, "r0": r0, "r1": r1, "seed": seed}
                model = random_complex(n0, n1, r0, r1, seed, with_chirality=n0 == n1)
                cx = model.complex
                phi.record(self._shear_residual(cx, seed), case)
                if model.gamma is None:
                    continue
                check = duality_residual(cx, model.gamma)
                dual.record(abs(as_complex(check.alpha_residual)), case)
                if check.riesz_residual is not None:
                    dual.record(abs(as_complex(check.riesz_residual)), case)
                if previous is not None and n0 <= 2 and previous[0].n0 <= 2:
                    pair = direct_sum_torsion_check(previous[0], previous[1], cx, model.gamma)
                    dsum.record(abs(as_complex(pair.residual)), case)
                previous = (cx, model.gamma)
        return [phi, dsum, dual]

    def _shear_residual(self, cx: Z2Complex, seed: int) -> float:
        be = cx.backend
        rng = SplitMix64(seed ^ 0xABCDEF)
        dec = decompose(cx)
        reference = cohomology(cx, dec)
        X, S, T, U = [], [], [], []
        for k in (0, 1):
            b, h, a = dec.dims(be, k)
            X.append(be.matrix([[(rng.integer(-2, 2), rng.integer(-2, 2)) for _ in range(a)] for _ in range(b + h)],
                               (b + h, a)))
            S.append(random_invertible(rng, be, h))
            T.append(be.matrix([[(rng.integer(-2, 2), 0) for _ in range(h)] for _ in range(b)], (b, h)))
            U.append(random_invertible(rng, be, a))
        sheared = shear_decomposition(cx, dec, X, S, T, U)
        c = graded_element("C", cx.n0, cx.n1, QQ_I(2, 1))
        lhs = phi_iso(cx, dec, c, reference).coeff
        rhs = phi_iso(cx, sheared, c, reference).coeff
        return abs(as_complex(lhs - rhs))

    def _float_cases(self) -> List[Tuple[int, int, int, int]]:
        base = self.config.random.seed if self.config.random else 0
        shapes = [(3, 2, 1), (3, 1, 1), (4, 2, 2), (4, 1, 2), (2, 1, 0)]
        return [(shapes[i % len(shapes)][0], shapes[i % len(shapes)][1], shapes[i % len(shapes)][2], base + i)
                for i in range(self.config.count)]

    def _float_case_residuals(self, n: int, r0: int, r1: int, seed: int, slope: bool = False) -> Dict[str, float]:
        """All float identities for one random instance"""
        model = random_complex(n, n, r0, r1, seed, with_metric=seed % 2 == 1).as_float()
        cx, gamma = model.complex, model.gamma
        out = {}
        cuts = gap_cuts(cx, gamma)
        reference = cohomology(cx)
        report = torsion_report(cx, gamma, cuts[0], reference=reference)
        rho = refined_torsion(cx, gamma, reference=reference)
        out["rho_H"] = _relative(report.rho_H.to_complex(), rho.to_complex())
        if len(cuts) > 1:
            out["spread"] = rho_H_spread(cx, gamma, cuts)
        sig = build_signature(cx, gamma, [cuts[0]])
        high = sig.window_count - 1
        if sig.window_dims(high) != (0, 0):
            out["eta"] = eta_identity_check(sig, high).residual
            low_edge = torsion_angle(sig, [high], policy="low_edge").theta
            max_gap = torsion_angle(sig, [high]).theta
            out["theta"] = _relative(graded_det(sig, high, low_edge).value, graded_det(sig, high, max_gap).value)
            out["parity"] = 0.0 if small_eigenvalue_parity(sig, high).holds else 1.0
        out["rs_self"] = abs(rs_metric_norm(cx, mathai_wu_element(cx)).log_value)
        if slope:
            s, _ = variation_slope(chirality_path(gamma, seed), cx, 0.0)
            out["slope"] = abs(s - 2.0)
        unitary = random_unitary_complex(n, r0, r1, seed)
        out["duality"] = duality_residual(unitary.complex, unitary.gamma).max_relative()
        return out

    def _float_suites(self) -> List[Suite]:
        suites = {
            "rho_H": Suite("rho_Gamma = Det_gr x rho_low", self.tol.identity),
            "spread": Suite("rho_H independent of the cut", self.tol.split_spread),
            "eta": Suite("eta identity", self.tol.eta_identity),
            "theta": Suite("Det_gr independent of theta", self.tol.theta),
            "parity": Suite("small-eigenvalue parity", 0.0),
            "rs_self": Suite("Ray-Singer norm of the Mathai-Wu element", self.tol.rs_self),
            "slope": Suite("variation residual slope 2", self.tol.slope),
            "duality": Suite("duality with Riesz transport (float)", self.tol.duality),
        }
        for i, (n, r0, r1, seed) in enumerate(self._float_cases()):
            residuals = self._float_case_residuals(n, r0, r1, seed, slope=i < 3)
            for key, value in residuals.items():
                case = {"n0": n, "n1": n, "r0": r0, "r1": r1, "seed": seed}
                if value > suites[key].tolerance:
                    case = self._shrink(case, key)
                suites[key].record(value, case)
        return list(suites.values())

    def _shrink(self, case: Dict, key: str) -> Dict:
        """Smallest (n, r0, r1) with the same seed that still fails the identity"""
        tolerance = {
            "rho_H": self.tol.identity, "spread": self.tol.split_spread, "eta": self.tol.eta_identity,
            "theta": self.tol.theta, "parity": 0.0, "rs_self": self.tol.rs_self, "slope": self.tol.slope,
            "duality": self.tol.duality,
        }[key]
        for n in range(1, case["n0"]):
            for r0 in range(n + 1):
                for r1 in range(n - r0 + 1):
                    try:
                        value = self._float_case_residuals(n, r0, r1, case["seed"], slope=key == "slope").get(key)
                    except PreconditionError:
                        continue
                    if value is not None and value > tolerance:
                        logger.info("Shrunk failing %s case to n=%d ranks (%d, %d)", key, n, r0, r1)
                        return {"n0": n, "n1": n, "r0": r0, "r1": r1, "seed": case["seed"]}
        return case

    # -- torsion / torus -------------------------------------------------

    def cmd_torsion(self) -> Tuple[Dict, List[Suite]]:
        cx, gamma = self.load_model()
        results: Dict = {"dims": [cx.n0, cx.n1]}
        exact_rho = refined_torsion(cx, gamma)
        results["rho_gamma"] = exact_rho.to_dict()
        cxf, gf = cx.as_float(), gamma.as_float(cx.backend)
        reference = cohomology(cxf)
        float_rho = refined_torsion(cxf, gf, reference=reference).to_complex()
        cuts = sorted(set(self.config.cuts))
        results["cuts"] = []
        identity = Suite("rho_Gamma = rho_H", self.tol.identity)
        eta = Suite("eta identity", self.tol.eta_identity)
        parity = Suite("small-eigenvalue parity", 0.0)
        theta_suite = Suite("Det_gr independent of theta", self.tol.theta)
        for cut in cuts:
            theta = self._theta(cxf, gf, cut)
            report = torsion_report(cxf, gf, cut, theta, reference)
            results["cuts"].append(report.to_dict())
            identity.record(_relative(report.rho_H.to_complex(), float_rho), {"cut": cut})
            sig = build_signature(cxf, gf, [cut])
            high = sig.window_count - 1
            if sig.window_dims(high) == (0, 0):
                continue
            check = eta_identity_check(sig, high)
            eta.record(check.residual, {"cut": cut})
            results["cuts"][-1]["eta_identity"] = {
                "theta": check.theta, "ldet": check.ldet, "predicted": check.predicted,
            }
            record = small_eigenvalue_parity(sig, high)
            parity.record(0.0 if record.holds else 1.0, {"cut": cut})
            if not record.low_form_holds:
                self._warn(f"Low-window parity form fails at cut {cut:g} (n0 odd)")
            other = torsion_angle(sig, [high], policy="low_edge").theta
            theta_suite.record(_relative(graded_det(sig, high, other).value, report.det_gr.value), {"cut": cut})
        suites = [identity, eta, parity, theta_suite]
        if len(cuts) > 1:
            spread = Suite("rho_H independent of the cut", self.tol.split_spread)
            spread.record(rho_H_spread(cxf, gf, cuts))
            multiplicative = Suite("Det_gr multiplicative over windows", self.tol.identity)
            multiplicative.record(detgr_multiplicativity(cxf, gf, cuts[0], cuts[1]))
            suites += [spread, multiplicative]
        return results, suites

    def cmd_torus(self) -> Tuple[Dict, List[Suite]]:
        cfg = self.torus_config()
        cut = self.config.cuts[0]
        theta = self.config.theta_value if self.config.theta == ThetaPolicy.EXPLICIT else None
        report = torus_rho_an(cfg, cut, theta, self.config.jobs)
        oracle = cohomology_oracle(cfg)
        dims = Suite("cohomology dims match the rank oracle", 0.0)
        dims.record(0.0 if tuple(report.cohomology_dims) == tuple(oracle) else 1.0,
                    {"aggregate": list(report.cohomology_dims), "oracle": list(oracle)})
        square = Suite("per-mode d^2 = 0", 1e-14)
        involution = Suite("per-mode Gamma^2 = I", 1e-14)
        gam = chirality_operator(cfg.metric)
        involution.record(float(np.max(np.abs(gam @ gam - np.eye(8)))))
        for k in mode_lattice(cfg.K):
            D = build_mode_complex(k, cfg).operator
            square.record(float(np.max(np.abs(D @ D))) / max(1.0, float(np.max(np.abs(D))) ** 2), {"k": list(k)})
        adjoint = Suite("adjoint signature operator = dual config", 1e-12)
        adjoint.record(dual_signature_defect(cfg))
        results = {
            "torus": cfg.to_dict(),
            "report": report.to_dict(),
            "oracle_dims": list(oracle),
            "hermitian": cfg.is_hermitian,
        }
        return results, [dims, square, involution, adjoint]

    # -- deformations ----------------------------------------------------

    def cmd_deform(self) -> Tuple[Dict, List[Suite]]:
        if self.config.deform_mode == DeformMode.METRIC:
            if self.config.model == ModelKind.TORUS:
                return self._deform_torus_metric()
            return self._deform_chirality()
        return self._deform_flux()

    def _deform_torus_metric(self) -> Tuple[Dict, List[Suite]]:
        cfg = self.torus_config()
        cut = self.config.cuts[0]
        s1, s2, s3 = cfg.metric

        def family(t: float) -> Tuple[float, float, float]:
            return (s1 * t, s2 * math.sqrt(t), s3)

        grid = [1.0 + j / (METRIC_GRID - 1) for j in range(METRIC_GRID)]
        supertrace = Suite("Tr_s(Gamma' Gamma) = 0", self.tol.supertrace)
        for t in grid:
            supertrace.record(abs(metric_family_supertrace(family, t)), {"t": t})
        invariance = metric_grid_invariance(cfg, [family(t) for t in grid], cut, self.config.jobs)
        constant = Suite("e^xi rho_low constant along the metric grid", self.tol.metric_invariance)
        constant.record(invariance.defect)

        def zero_mode(t: float):
            mode = build_mode_complex((0, 0, 0), TorusConfig(cfg.K, cfg.a, cfg.h, family(t)))
            return mode.complex, mode.gamma

        track = eta_jump_tracker(zero_mode, grid, cut)
        results = {"torus": cfg.to_dict(), "grid": grid, "invariance": invariance.to_dict(), "eta_track": track.to_dict()}
        return results, [supertrace, constant]

    def _deform_chirality(self) -> Tuple[Dict, List[Suite]]:
        cx, gamma = self.load_model()
        cxf = cx.as_float()
        seed = self.config.random.seed if self.config.random else 0
        slope, runs = variation_slope(chirality_path(gamma, seed), cxf, 0.0)
        suite = Suite("variation residual slope 2", self.tol.slope)
        suite.record(abs(slope - 2.0))
        results = {
            "slope": slope,
            "steps": [r.h for r in runs],
            "residuals": [r.residual for r in runs],
        }
        return results, [suite]

    def _flux_check(self, cx: Z2Complex, gamma: Chirality, beta, cut: float):
        last = None
        for h in FLUX_STEPS:
            try:
                return flux_variation_check(cx, gamma, beta, cut, h)
            except CutThroughClusterError as e:
                self._warn(f"Window collision along the flux family at h={h:g}; subdividing")
                last = e
        raise last

    def _deform_flux(self) -> Tuple[Dict, List[Suite]]:
        cx, gamma = self.load_model()
        cxf, gf = cx.as_float(), gamma.as_float(cx.backend)
        cut = self.config.cuts[0]
        seed = self.config.random.seed if self.config.random else 0
        traceless = self._flux_check(cxf, gf, random_flux_generator(seed, cxf.n0, cxf.n1, 0.0), cut)
        loaded = self._flux_check(cxf, gf, random_flux_generator(seed + 1, cxf.n0, cxf.n1, 5.0), cut)
        constant = Suite("supertraceless flux leaves e^xi rho_low constant", self.tol.flux_constant)
        constant.record(abs(traceless.drift))
        drift = Suite("drift rate equals -Tr_s(beta)", self.tol.flux_drift)
        drift.record(abs(loaded.drift + 5.0) / 5.0)
        ledger = Suite("window supertraces add up", 1e-10)
        pieces = Suite("per-window derivative identities", 1e-6)
        for run in (traceless, loaded):
            ledger.record(run.ledger_residual)
            for r in run.residuals:
                pieces.record(r)
        results = {"supertraceless": traceless.to_dict(), "supertrace_5": loaded.to_dict()}
        return results, [constant, drift, ledger, pieces]

    # -- duality and norms -----------------------------------------------

    def cmd_dual(self) -> Tuple[Dict, List[Suite]]:
        if self.config.model == ModelKind.TORUS:
            cfg = self.torus_config()
            chain = torus_duality_chain(cfg, self.config.cuts[0], self.config.jobs)
            residual = Suite("torus duality chain", self.tol.torus_chain)
            residual.record(chain.max_residual)
            model = Suite("connection dual = dual config", 1e-12)
            model.record(chain.max_model_defect)
            suites = [residual, model]
            if chain.rho_an_residual is not None:
                phase = Suite("alpha(rho_an) = exp(i phase) rho_an(dual)", self.tol.torus_chain)
                phase.record(chain.rho_an_residual)
                suites.append(phase)
            return {"torus": cfg.to_dict(), "chain": chain.to_dict()}, suites
        cx, gamma = self.load_model()
        check = duality_residual(cx, gamma)
        exact = cx.backend.exact
        alpha = Suite("rho_Gamma* = alpha(rho_Gamma)", 0.0 if exact else self.tol.duality)
        alpha.record(abs(as_complex(check.alpha_residual)) if exact else check.max_relative())
        results = {
            "torsion": check.torsion.to_dict(),
            "dual_torsion": check.dual_torsion.to_dict(),
            "alpha_torsion": check.alpha_torsion.to_dict(),
            "unitary": check.riesz_torsion is not None,
        }
        suites = [alpha]
        if check.riesz_torsion is not None:
            cxf, gf = cx.as_float(), gamma.as_float(cx.backend)
            rs = Suite("Ray-Singer torsion of the connection dual", self.tol.rs_duality)
            rs.record(rs_duality_check(cxf, gf, self.config.cuts[0]))
            results["norm_ratio_defect"] = norm_duality_check(cxf, gf, self.config.cuts[0])
            suites.append(rs)
        return results, suites

    def cmd_rsnorm(self) -> Tuple[Dict, List[Suite]]:
        cut = self.config.cuts[0]
        if self.config.model == ModelKind.TORUS:
            cfg = self.torus_config()
            total = 0.0
            for k in mode_lattice(cfg.K):
                mode = build_mode_complex(k, cfg)
                total += rs_norm_of_rho_an(mode.complex, mode.gamma, cut).norm.log_value
            suite = Suite("||rho_an||^RS = 1", self.tol.rs_hermitian if cfg.is_hermitian else self.tol.rs_general)
            suite.record(abs(math.exp(total) - 1.0))
            return {"torus": cfg.to_dict(), "log_norm": total, "norm": math.exp(total)}, [suite]
        general = Suite("||rho_an||^RS = e^(pi Im eta) x chirality defect", self.tol.rs_general)
        self_test = Suite("Ray-Singer norm of the Mathai-Wu element", self.tol.rs_self)
        rows = []
        count = self.config.count if self.config.model == ModelKind.RANDOM else 1
        for j in range(count):
            if self.config.model == ModelKind.RANDOM:
                spec = self.config.random
                model = random_complex(spec.n0, spec.n1, spec.r0, spec.r1, spec.seed + j, spec.radius,
                                       with_metric=spec.with_metric).as_float()
                cx, gamma = model.complex, model.gamma
            else:
                cx, gamma = self.load_model()
                cx, gamma = cx.as_float(), gamma.as_float(cx.backend)
            comparison = rs_norm_of_rho_an(cx, gamma, cut)
            general.record(comparison.relative_residual, {"instance": j})
            self_test.record(abs(rs_metric_norm(cx, mathai_wu_element(cx), cut).log_value), {"instance": j})
            rows.append({
                "norm": comparison.norm.value,
                "predicted": comparison.predicted,
                "chirality_defect": comparison.chirality_defect,
            })
        return {"instances": rows}, [general, self_test]

    def cmd_leak(self) -> Tuple[Dict, List[Suite]]:
        cfg = self.torus_config()
        records = boundary_leak(cfg, range(cfg.K + 1), cut=self.config.cuts[0])
        intertwining = Suite("truncated gauge map intertwines", 1e-10)
        for record in records:
            intertwining.record(record.intertwining_defect, {"K": record.K})
        return {"torus": cfg.to_dict(), "records": [r.to_dict() for r in records]}, [intertwining]
