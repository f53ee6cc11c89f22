"""
Fourier-truncated twisted de Rham complexes of the flat 3-torus

Each lattice mode k contributes a 4+4 dimensional complex: even forms (1, dx12, dx13, dx23)
and odd forms (dx1, dx2, dx3, dx123) with d = i(k+a)^ + h dx123^. The chirality is the
Hodge star scaled by -1, +1, +1, -1 on degrees 0..3.
"""
import cmath
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import reduce
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from sympy.combinatorics import Permutation

from .detline import DetElement, fuse_graded, sign_M
from .errors import PreconditionError
from .linalg_core import numerical_rank
from .signature import (
    EtaResult,
    TorsionReport,
    TorsionScalar,
    build_signature,
    eta_invariant,
    torsion_report,
)
from .z2complex import (
    Chirality,
    CohomologySpaces,
    Z2Complex,
    alpha_on_cohomology,
    chirality_supertrace,
    cohomology,
    connection_dual,
    dual_complex,
    riesz_transport,
)

logger = logging.getLogger(__name__)

MONOMIALS: Tuple[Tuple[int, ...], ...] = ((), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2))
EVEN_SLOTS = (0, 4, 5, 6)
ODD_SLOTS = (1, 2, 3, 7)
CHIRALITY_SIGNS = (-1, 1, 1, -1)
TOP = (0, 1, 2)

Mode = Tuple[int, int, int]


@dataclass(frozen=True)
class TorusConfig:
    """Truncation radius, holonomy, constant flux and a diagonal metric"""
    K: int = 1
    a: Tuple[complex, complex, complex] = (0j, 0j, 0j)
    h: complex = 0j
    metric: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    rank: int = 1

    def __post_init__(self):
        if self.K < 0:
            raise ValueError(f"Truncation radius must be non-negative, got {self.K}")
        if len(self.a) != 3:
            raise ValueError(f"Holonomy needs 3 components, got {len(self.a)}")
        if len(self.metric) != 3 or any(s <= 0 for s in self.metric):
            raise ValueError(f"Metric scalings must be 3 positive reals, got {self.metric}")
        if self.rank != 1:
            raise ValueError("Only rank 1 is supported")
        object.__setattr__(self, "a", tuple(complex(x) for x in self.a))
        object.__setattr__(self, "h", complex(self.h))
        object.__setattr__(self, "metric", tuple(float(s) for s in self.metric))

    @property
    def is_hermitian(self) -> bool:
        return all(x.imag == 0 for x in self.a) and self.h.imag == 0

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["a"] = [[x.real, x.imag] for x in self.a]
        data["h"] = [self.h.real, self.h.imag]
        data["metric"] = list(self.metric)
        return data


@dataclass
class ModeComplex:
    k: Mode
    complex: Z2Complex
    gamma: Chirality
    operator: np.ndarray

    @property
    def is_acyclic(self) -> bool:
        return cohomology(self.complex).dims == (0, 0)


# ---------------------------------------------------------------------------
# Exterior algebra in the monomial basis


def _slot(I: Tuple[int, ...]) -> int:
    return MONOMIALS.index(tuple(I))


def _permutation_sign(indices: Sequence[int]) -> int:
    order = sorted(range(len(indices)), key=lambda i: indices[i])
    return -1 if Permutation(order).parity() else 1


def wedge_operator(A: Tuple[int, ...]) -> np.ndarray:
    """Left exterior multiplication by dx_A on the 8 monomials"""
    W = np.zeros((8, 8), dtype=complex)
    for col, I in enumerate(MONOMIALS):
        if set(A) & set(I):
            continue
        W[_slot(tuple(sorted(A + I))), col] = _permutation_sign(A + I)
    return W


def exterior_operator(v: Sequence[complex], h: complex) -> np.ndarray:
    """sum_j v_j dx_j^ + h dx123^"""
    D = h * wedge_operator(TOP)
    for j in range(3):
        D = D + v[j] * wedge_operator((j,))
    return D


def metric_weights(metric: Sequence[float]) -> np.ndarray:
    """|dx_I|^2 times the volume, for each monomial"""
    vol = float(np.prod(metric))
    return np.array([vol * float(np.prod([metric[i] ** -2 for i in I])) for I in MONOMIALS])


def _star_exponents() -> np.ndarray:
    """Exponents of the metric scalings in the Hodge star factor of each monomial"""
    E = np.zeros((8, 3))
    for col, I in enumerate(MONOMIALS):
        for i in range(3):
            E[col, i] = -1.0 if i in I else 1.0
    return E


def chirality_operator(metric: Sequence[float]) -> np.ndarray:
    """Gamma = s_q * on the 8 monomials"""
    s = np.asarray(metric, dtype=float)
    E = _star_exponents()
    Gam = np.zeros((8, 8), dtype=complex)
    for col, I in enumerate(MONOMIALS):
        J = tuple(i for i in range(3) if i not in I)
        factor = float(np.prod(s ** E[col]))
        Gam[_slot(J), col] = CHIRALITY_SIGNS[len(I)] * _permutation_sign(I + J) * factor
    return Gam


def _parity_blocks(M: np.ndarray, even: Sequence[int], odd: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """(odd <- even, even <- odd) blocks"""
    return M[np.ix_(odd, even)], M[np.ix_(even, odd)]


def build_chirality(metric: Sequence[float]) -> Chirality:
    g0, g1 = _parity_blocks(chirality_operator(metric), EVEN_SLOTS, ODD_SLOTS)
    return Chirality(g0, g1)


def mode_vector(k: Mode, config: TorusConfig) -> np.ndarray:
    return 1j * (np.asarray(k, dtype=float) + np.asarray(config.a, dtype=complex))


def build_mode_complex(k: Mode, config: TorusConfig) -> ModeComplex:
    D = exterior_operator(mode_vector(k, config), config.h)
    d0, d1 = _parity_blocks(D, EVEN_SLOTS, ODD_SLOTS)
    weights = metric_weights(config.metric)
    cx = Z2Complex(
        d0, d1,
        G0=np.diag(weights[list(EVEN_SLOTS)]).astype(complex),
        G1=np.diag(weights[list(ODD_SLOTS)]).astype(complex),
        name=f"mode{k}",
    )
    return ModeComplex(k=tuple(k), complex=cx, gamma=build_chirality(config.metric), operator=D)


def mode_lattice(K: int) -> List[Mode]:
    """All k with |k_j| <= K in lexicographic order"""
    return list(itertools.product(range(-K, K + 1), repeat=3))


def mode_complexes(config: TorusConfig) -> List[ModeComplex]:
    return [build_mode_complex(k, config) for k in mode_lattice(config.K)]


def dual_config(config: TorusConfig) -> TorusConfig:
    """Conjugate holonomy and flux"""
    return replace(config, a=tuple(x.conjugate() for x in config.a), h=config.h.conjugate())


def signature_operator(mode: ModeComplex) -> np.ndarray:
    Gam = chirality_operator_for(mode)
    return Gam @ mode.operator + mode.operator @ Gam


def chirality_operator_for(mode: ModeComplex) -> np.ndarray:
    Gam = np.zeros((8, 8), dtype=complex)
    Gam[np.ix_(ODD_SLOTS, EVEN_SLOTS)] = mode.gamma.g0
    Gam[np.ix_(EVEN_SLOTS, ODD_SLOTS)] = mode.gamma.g1
    return Gam


def dual_signature_defect(config: TorusConfig) -> float:
    """max over modes of ||B^* - B'||, B' the signature operator of the dual config"""
    weights = metric_weights(config.metric)
    G, G_inv = np.diag(weights), np.diag(1.0 / weights)
    dual = dual_config(config)
    worst = 0.0
    for k in mode_lattice(config.K):
        B = signature_operator(build_mode_complex(k, config))
        B_dual = signature_operator(build_mode_complex(k, dual))
        worst = max(worst, float(np.linalg.norm(G_inv @ B.conj().T @ G - B_dual)))
    return worst


def metric_family_supertrace(family: Callable[[float], Sequence[float]], t: float, h: float = 1e-6) -> complex:
    """Tr_s(Gamma' Gamma) along a diagonal metric family

    The chirality is the same on every mode. Gamma' is formed from the logarithmic rates of
    the three scalings, so the exponent bookkeeping cancels without finite-difference noise.
    """
    s = np.asarray(family(t), dtype=float)
    rates = (np.log(np.asarray(family(t + h), dtype=float)) - np.log(np.asarray(family(t - h), dtype=float))) / (2 * h)
    if np.any(s <= 0):
        raise PreconditionError(f"Metric family left the positive cone at t={t}: {s}")
    Gam = chirality_operator(s)
    Gam_dot = Gam @ np.diag(_star_exponents() @ rates)
    dot_blocks = _parity_blocks(Gam_dot, EVEN_SLOTS, ODD_SLOTS)
    return chirality_supertrace(Chirality(*dot_blocks), build_chirality(s))


# ---------------------------------------------------------------------------
# Rank oracle over the whole truncated box


def full_differential(config: TorusConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Block-diagonal d0, d1 over all modes"""
    modes = mode_complexes(config)
    return (scipy.linalg.block_diag(*[m.complex.d0 for m in modes]),
            scipy.linalg.block_diag(*[m.complex.d1 for m in modes]))


def cohomology_oracle(config: TorusConfig) -> Tuple[int, int]:
    """Twisted cohomology dims from ranks of the assembled differentials"""
    d0, d1 = full_differential(config)
    r0, r1 = numerical_rank(d0), numerical_rank(d1)
    return d0.shape[1] - r0 - r1, d0.shape[0] - r0 - r1


# ---------------------------------------------------------------------------
# Per-mode pipeline and aggregation


@dataclass
class TorusReport:
    """Aggregate of the per-mode reports in lexicographic order"""
    modes: int
    cut: float
    rho_H: TorsionScalar
    det_gr: TorsionScalar
    xi: complex
    eta: EtaResult
    d_minus: Tuple[int, int]
    cohomology_dims: Tuple[int, int]
    fusion_sign: int
    nonacyclic_modes: List[Mode] = field(default_factory=list)
    eta_trivial: Optional[float] = None
    rho_an: Optional[TorsionScalar] = None

    def to_dict(self) -> Dict:
        return {
            "modes": self.modes,
            "cut": self.cut,
            "rho_H": self.rho_H.to_dict(),
            "det_gr": self.det_gr.to_dict(),
            "xi": [self.xi.real, self.xi.imag],
            "eta": self.eta.to_dict(),
            "d_minus": list(self.d_minus),
            "cohomology_dims": list(self.cohomology_dims),
            "fusion_sign": self.fusion_sign,
            "nonacyclic_modes": [list(k) for k in self.nonacyclic_modes],
            "eta_trivial": self.eta_trivial,
            "rho_an": self.rho_an.to_dict() if self.rho_an is not None else None,
        }


def mode_reports(config: TorusConfig, cut: float = 0.0, theta: Optional[float] = None, jobs: int = 1,
                 references: Optional[Dict[Mode, CohomologySpaces]] = None) -> List[Tuple[Mode, TorsionReport]]:
    """Torsion report of every mode; results come back in lexicographic order"""
    references = references or {}

    def run(k: Mode) -> Tuple[Mode, TorsionReport]:
        mode = build_mode_complex(k, config)
        return k, torsion_report(mode.complex, mode.gamma, cut, theta, references.get(k))

    lattice = mode_lattice(config.K)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, lattice))
    return [run(k) for k in lattice]


def _check_mode_set(keys: List[Mode], K: Optional[int]) -> None:
    if len(set(keys)) != len(keys):
        raise PreconditionError("Mode set contains duplicates")
    if keys != sorted(keys):
        raise PreconditionError("Modes must be given in lexicographic order")
    if K is not None and keys != mode_lattice(K):
        raise PreconditionError(f"Mode set does not cover the box |k_j| <= {K}")


def aggregate(reports: Sequence[Tuple[Mode, TorsionReport]], K: Optional[int] = None) -> TorusReport:
    """Multiply per-mode torsions in log form; cohomology lines fuse with the graded sign"""
    keys = [tuple(k) for k, _ in reports]
    _check_mode_set(keys, K)
    if not reports:
        raise PreconditionError("No modes to aggregate")
    log_rho = 0j
    log_det = 0j
    xi = 0j
    eta = EtaResult(0, 0, 0, 0)
    d_minus = [0, 0]
    dims = [0, 0]
    sign = 0
    nonacyclic = []
    for k, rep in reports:
        h0, h1 = rep.cohomology_dims
        sign += sign_M(dims[1], h0)
        dims[0] += h0
        dims[1] += h1
        if (h0, h1) != (0, 0):
            nonacyclic.append(tuple(k))
        log_rho += rep.log_rho_H
        log_det += rep.det_gr.log
        xi += rep.xi
        eta = eta + rep.eta
        d_minus[0] += rep.d_minus[0]
        d_minus[1] += rep.d_minus[1]
    sign %= 2
    return TorusReport(
        modes=len(reports),
        cut=reports[0][1].cut,
        rho_H=TorsionScalar.from_log(log_rho + 1j * math.pi * sign),
        det_gr=TorsionScalar.from_log(log_det),
        xi=xi,
        eta=eta,
        d_minus=(d_minus[0], d_minus[1]),
        cohomology_dims=(dims[0], dims[1]),
        fusion_sign=sign,
        nonacyclic_modes=nonacyclic,
    )


def fused_element(reports: Sequence[Tuple[Mode, TorsionReport]]) -> DetElement:
    """The fused cohomology element itself; overflows for large boxes, use aggregate there"""
    return reduce(fuse_graded, [rep.rho_H for _, rep in reports])


def eta_trivial(config: TorusConfig, full: bool = False) -> float:
    """1/2 eta of B0 on the a = 0 model with the same metric and flux

    Uses the finite count eta0 unless ``full`` asks for the corrected eta.
    """
    trivial = replace(config, a=(0j, 0j, 0j))
    total = EtaResult(0, 0, 0, 0)
    for mode in mode_complexes(trivial):
        sig = build_signature(mode.complex, mode.gamma)
        total = total + eta_invariant(sig.B0)
    value = total.eta / 2 if full else total.eta0 / 2
    logger.debug("eta_trivial(K=%d) = %g", config.K, value)
    return value


def torus_rho_an(config: TorusConfig, cut: float = 0.0, theta: Optional[float] = None, jobs: int = 1,
                 full_eta: bool = False) -> TorusReport:
    report = aggregate(mode_reports(config, cut, theta, jobs), config.K)
    report.eta_trivial = eta_trivial(config, full_eta)
    report.rho_an = report.rho_H * TorsionScalar.from_log(1j * math.pi * config.rank * report.eta_trivial)
    return report


# ---------------------------------------------------------------------------
# Experiments


@dataclass
class MetricInvariance:
    metrics: List[Tuple[float, float, float]]
    values: List[complex]

    @property
    def defect(self) -> float:
        base = self.values[0]
        worst = 0.0
        for v in self.values[1:]:
            diff = v - base
            worst = max(worst, abs(complex(diff.real, math.remainder(diff.imag, 2 * math.pi))))
        return worst

    def to_dict(self) -> Dict:
        return {
            "metrics": [list(m) for m in self.metrics],
            "values": [[v.real, v.imag] for v in self.values],
            "defect": self.defect,
        }


def metric_grid_invariance(config: TorusConfig, metrics: Sequence[Sequence[float]], cut: float = 0.0,
                           jobs: int = 1) -> MetricInvariance:
    """log(e^xi rho_low) of the full truncated model at each metric

    Cohomology references are taken from the metric-free complexes so they stay fixed.
    """
    references = {}
    for k in mode_lattice(config.K):
        mode = build_mode_complex(k, config)
        references[k] = cohomology(Z2Complex(mode.complex.d0, mode.complex.d1, name=mode.complex.name))
    values = []
    for metric in metrics:
        cfg = replace(config, metric=tuple(metric))
        total = 0j
        for _, rep in mode_reports(cfg, cut, None, jobs, references):
            total += rep.xi + cmath.log(rep.rho_low.to_complex())
        values.append(total)
    return MetricInvariance(metrics=[tuple(m) for m in metrics], values=values)


@dataclass
class DualityChain:
    modes: int
    max_residual: float
    max_model_defect: float
    eta_trivial: float
    eta_trivial_dual: float
    rho_an: Optional[TorsionScalar] = None
    rho_an_dual: Optional[TorsionScalar] = None
    rho_an_residual: Optional[float] = None

    @property
    def rho_an_phase(self) -> float:
        """alpha(rho_an) / rho_an(dual) = exp(-i pi (eta_t + eta_t')) on the unit circle"""
        return -math.pi * (self.eta_trivial + self.eta_trivial_dual)

    def to_dict(self) -> Dict:
        return {
            "modes": self.modes,
            "max_residual": self.max_residual,
            "max_model_defect": self.max_model_defect,
            "eta_trivial": self.eta_trivial,
            "eta_trivial_dual": self.eta_trivial_dual,
            "rho_an_phase": self.rho_an_phase,
            "rho_an": self.rho_an.to_dict() if self.rho_an is not None else None,
            "rho_an_dual": self.rho_an_dual.to_dict() if self.rho_an_dual is not None else None,
            "rho_an_residual": self.rho_an_residual,
        }


def torus_duality_chain(config: TorusConfig, cut: float = 0.0, jobs: int = 1) -> DualityChain:
    """Per mode: Psi(alpha(rho_H)) against rho_H of the connection dual

    The connection dual of each mode is compared with the same mode of the dual config.
    On an acyclic model alpha(rho_an) / rho_an(dual) is also measured against exp(i rho_an_phase).
    """
    dual = dual_config(config)
    worst = 0.0
    model_defect = 0.0
    for k in mode_lattice(config.K):
        mode = build_mode_complex(k, config)
        cx, gamma = mode.complex, mode.gamma
        reference = cohomology(cx)
        dual_reference = cohomology(dual_complex(cx))
        target = connection_dual(cx, gamma)
        target_reference = cohomology(target)
        expected = build_mode_complex(k, dual).complex
        model_defect = max(model_defect,
                           float(np.linalg.norm(target.d0 - expected.d0)),
                           float(np.linalg.norm(target.d1 - expected.d1)))
        rho = torsion_report(cx, gamma, cut, reference=reference).rho_H
        moved = riesz_transport(cx, gamma, alpha_on_cohomology(cx, rho, reference, dual_reference),
                                dual_reference, target_reference)
        rho_target = torsion_report(target, gamma, cut, reference=target_reference).rho_H
        worst = max(worst, abs(moved.to_complex() - rho_target.to_complex()) / abs(rho_target.to_complex()))

    report = torus_rho_an(config, cut, jobs=jobs)
    dual_report = torus_rho_an(dual, cut, jobs=jobs)
    chain = DualityChain(
        modes=len(mode_lattice(config.K)),
        max_residual=worst,
        max_model_defect=model_defect,
        eta_trivial=report.eta_trivial,
        eta_trivial_dual=dual_report.eta_trivial,
        rho_an=report.rho_an,
        rho_an_dual=dual_report.rho_an,
    )
    if report.cohomology_dims == (0, 0):
        # alpha on Det(0) x Det(0)^-1 is the conjugation
        log_ratio = report.rho_an.log.conjugate() - dual_report.rho_an.log
        chain.rho_an_residual = abs(cmath.exp(log_ratio) - cmath.exp(1j * chain.rho_an_phase))
    else:
        logger.info("rho_an duality measured per mode only: cohomology %s", report.cohomology_dims)
    return chain


@dataclass
class LeakRecord:
    K: int
    modes: int
    leaked_mass: float
    intertwining_defect: float
    invariance_defect: float

    def to_dict(self) -> Dict:
        return asdict(self)


def _coupled_operator(config: TorusConfig, lattice: List[Mode], shifts: Dict[int, complex],
                      form: Tuple[int, ...], diagonal: bool) -> Tuple[np.ndarray, float]:
    """Mode-diagonal part plus couplings k -> k + s e1 by coefficient * dx_form^

    Returns the assembled operator and the Frobenius mass of couplings leaving the box.
    """
    index = {k: i for i, k in enumerate(lattice)}
    n = 8 * len(lattice)
    M = np.zeros((n, n), dtype=complex)
    W = wedge_operator(form)
    leaked = 0.0
    for i, k in enumerate(lattice):
        block = slice(8 * i, 8 * i + 8)
        if diagonal:
            M[block, block] = exterior_operator(mode_vector(k, config), config.h)
        else:
            M[block, block] = np.eye(8)
        for s, coeff in shifts.items():
            target = (k[0] + s, k[1], k[2])
            if target not in index:
                leaked += abs(coeff) ** 2 * float(np.sum(np.abs(W) ** 2))
                continue
            j = index[target]
            M[8 * j:8 * j + 8, block] += coeff * W
    return M, leaked


def _coupled_complex(config: TorusConfig, lattice: List[Mode], D: np.ndarray, name: str) -> Tuple[Z2Complex, Chirality]:
    even = [8 * m + s for m in range(len(lattice)) for s in EVEN_SLOTS]
    odd = [8 * m + s for m in range(len(lattice)) for s in ODD_SLOTS]
    d0, d1 = _parity_blocks(D, even, odd)
    weights = np.tile(metric_weights(config.metric), len(lattice))
    gam = scipy.linalg.block_diag(*[chirality_operator(config.metric)] * len(lattice))
    g0, g1 = _parity_blocks(gam, even, odd)
    cx = Z2Complex(d0, d1, np.diag(weights[even]).astype(complex), np.diag(weights[odd]).astype(complex), name=name)
    return cx, Chirality(g0, g1)


def boundary_leak(config: TorusConfig, radii: Sequence[int] = (0, 1, 2), amplitude: float = 0.5,
                  cut: float = 0.0) -> List[LeakRecord]:
    """Gauge the flux by B = b cos(x1) dx23 inside the truncated box

    The gauged flux h dx123 + b sin(x1) dx123 couples neighbouring modes; exp(B^) is
    truncated to the box. Reports the coupling mass lost at the boundary, the
    intertwining defect of the truncated operators and |rho_H'/rho_H - 1|.
    """
    records = []
    for K in radii:
        cfg = replace(config, K=K)
        if cohomology_oracle(cfg) != (0, 0):
            raise PreconditionError("The boundary-leak experiment needs an acyclic model (generic holonomy)")
        lattice = mode_lattice(K)
        D, _ = _coupled_operator(cfg, lattice, {}, TOP, diagonal=True)
        flux_shift = amplitude / 2j
        D_gauged, _ = _coupled_operator(cfg, lattice, {1: flux_shift, -1: -flux_shift}, TOP, diagonal=True)
        E, leaked = _coupled_operator(cfg, lattice, {1: amplitude / 2, -1: amplitude / 2}, (1, 2), diagonal=False)
        intertwining = float(np.linalg.norm(D_gauged @ E - E @ D) / max(np.linalg.norm(D), 1e-300))
        cx, gamma = _coupled_complex(cfg, lattice, D, f"box{K}")
        cx_gauged, _ = _coupled_complex(cfg, lattice, D_gauged, f"box{K}'")
        rho = torsion_report(cx, gamma, cut).rho_H.to_complex()
        rho_gauged = torsion_report(cx_gauged, gamma, cut).rho_H.to_complex()
        record = LeakRecord(
            K=K,
            modes=len(lattice),
            leaked_mass=math.sqrt(leaked / float(np.linalg.norm(E) ** 2 + leaked)),
            intertwining_defect=intertwining,
            invariance_defect=abs(rho_gauged / rho - 1),
        )
        logger.info("Boundary leak K=%d: mass %.3e, invariance defect %.3e",
                    K, record.leaked_mass, record.invariance_defect)
        records.append(record)
    return records
