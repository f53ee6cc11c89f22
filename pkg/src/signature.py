"""
The signature operator B = Gamma d + d Gamma: spectral windows, the +/- split,
graded determinants, eta invariants, xi, rho_H and the refined analytic torsion
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .detline import DetElement, graded_element
from .errors import (
    CutThroughClusterError,
    DefectiveAmbiguityError,
    PreconditionError,
    VerificationFailure,
)
from .linalg_core import (
    AngleSector,
    SpectralSplit,
    choose_agmon_angle,
    generalized_eigenspaces,
    ldet_branch,
)
from .z2complex import (
    Chirality,
    CohomologySpaces,
    Z2Complex,
    chop,
    cohomology,
    decompose,
    differential_scale,
    inclusion_factor,
    refined_torsion,
)

logger = logging.getLogger(__name__)

AXIS_TOL = 1e-10
AXIS_WARN = 1e-6
SPLIT_TRACE_TOL = 1e-6


@dataclass
class TorsionScalar:
    """A nonzero complex number in log form; phase is kept on the branch it was computed on"""
    log_modulus: float
    phase: float

    @classmethod
    def from_log(cls, z: complex) -> "TorsionScalar":
        return cls(log_modulus=float(z.real), phase=float(z.imag))

    @classmethod
    def from_complex(cls, z: complex) -> "TorsionScalar":
        z = complex(z)
        if z == 0:
            raise PreconditionError("TorsionScalar must be nonzero")
        return cls(log_modulus=math.log(abs(z)), phase=cmath.phase(z))

    @property
    def log(self) -> complex:
        return complex(self.log_modulus, self.phase)

    @property
    def wrapped_phase(self) -> float:
        return float(math.remainder(self.phase, 2 * math.pi))

    @property
    def value(self) -> complex:
        return cmath.exp(self.log)

    def __mul__(self, other: "TorsionScalar") -> "TorsionScalar":
        return TorsionScalar(self.log_modulus + other.log_modulus, self.phase + other.phase)

    def to_dict(self) -> dict:
        return {"log_modulus": self.log_modulus, "phase": self.wrapped_phase}


@dataclass
class SignatureData:
    """Signature operator blocks and the windows of B^2 for both parities"""
    cx: Z2Complex
    gamma: Chirality
    B0: np.ndarray
    B1: np.ndarray
    cuts: List[float]
    splits: Tuple[SpectralSplit, SpectralSplit]

    def block(self, k: int) -> np.ndarray:
        return self.B0 if k % 2 == 0 else self.B1

    @property
    def window_count(self) -> int:
        return len(self.splits[0].windows)

    def restricted(self, k: int, j: int) -> np.ndarray:
        """B_k on window j"""
        return self.splits[k].restrict(self.block(k), j)

    def window_dims(self, j: int) -> Tuple[int, int]:
        return self.splits[0].windows[j].dim, self.splits[1].windows[j].dim

    def window_spectrum(self, j: int) -> np.ndarray:
        blocks = [self.restricted(k, j) for k in (0, 1)]
        return np.concatenate([np.linalg.eigvals(b) if b.shape[0] else np.zeros(0, dtype=complex) for b in blocks])

    def summary(self) -> List[dict]:
        rows = []
        for j in range(self.window_count):
            w = self.splits[0].windows[j]
            spectrum = self.window_spectrum(j)
            rows.append({
                "window": w.label,
                "dims": list(self.window_dims(j)),
                "min_modulus": float(np.min(np.abs(spectrum))) if spectrum.size else None,
                "max_modulus": float(np.max(np.abs(spectrum))) if spectrum.size else None,
            })
        return rows


def build_signature(cx: Z2Complex, gamma: Chirality, cuts: Sequence[float] = (),
                    cluster_tol: Optional[float] = None, tol: float = 1e-12) -> SignatureData:
    """B0 = g1 d0 + d1 g0 and B1 = g0 d1 + d0 g1, split by |eigenvalue| of B^2"""
    gamma = gamma.as_float()
    cx = cx.as_float()
    gamma.validate(cx.backend)
    d0, d1 = np.asarray(cx.d0), np.asarray(cx.d1)
    g0, g1 = np.asarray(gamma.g0), np.asarray(gamma.g1)
    if g0.shape != (cx.n1, cx.n0):
        raise PreconditionError(f"Chirality of shape {g0.shape} does not fit dims {(cx.n0, cx.n1)}")
    B0 = g1 @ d0 + d1 @ g0
    B1 = g0 @ d1 + d0 @ g1
    if B0.size:
        scale = max(1.0, np.linalg.norm(g1) * np.linalg.norm(B1) * np.linalg.norm(g0))
        defect = float(np.max(np.abs(B0 - g1 @ B1 @ g0)))
        if defect > tol * scale:
            raise VerificationFailure(f"B0 != Gamma B1 Gamma (defect {defect:.3e})")
    splits = tuple(generalized_eigenspaces(B @ B, cuts, tol=cluster_tol) for B in (B0, B1))
    if splits[0].cuts != splits[1].cuts:
        raise CutThroughClusterError("Parities disagree on the admissible cuts")
    sig = SignatureData(cx=cx, gamma=gamma, B0=B0, B1=B1, cuts=list(splits[0].cuts), splits=splits)
    logger.debug("Signature windows %s", sig.summary())
    return sig


@dataclass
class WindowSplit:
    """C^k = C^k_+ + C^k_- on one window, bases in window coordinates"""
    parity: int
    window: int
    plus: np.ndarray
    minus: np.ndarray
    B_plus: np.ndarray
    B_minus: np.ndarray

    @property
    def dims(self) -> Tuple[int, int]:
        return self.plus.shape[1], self.minus.shape[1]


def _split_parity(sig: SignatureData, k: int, j: int) -> WindowSplit:
    split = sig.splits[k]
    w = split.windows[j]
    cx, gamma = sig.cx, sig.gamma
    if k == 0:
        X = np.asarray(gamma.g1) @ np.asarray(cx.d0) @ np.asarray(gamma.g1) @ np.asarray(cx.d0)
    else:
        X = np.asarray(gamma.g0) @ np.asarray(cx.d1) @ np.asarray(gamma.g0) @ np.asarray(cx.d1)
    if w.dim == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return WindowSplit(k, j, empty, empty, empty, empty)
    square = split.restrict(sig.block(k) @ sig.block(k), j)
    P = split.restrict(X, j) @ np.linalg.inv(square)
    trace = complex(np.trace(P))
    r = int(round(trace.real))
    if abs(trace - r) > SPLIT_TRACE_TOL:
        raise DefectiveAmbiguityError(f"Projector onto C+ has non-integer trace {trace:.8g}", w.eigenvalues)
    U, _, _ = np.linalg.svd(P)
    Um, _, _ = np.linalg.svd(np.eye(w.dim) - P)
    plus, minus = U[:, :r], Um[:, :w.dim - r]
    Bw = split.restrict(sig.block(k), j)
    return WindowSplit(k, j, plus, minus, plus.conj().T @ Bw @ plus, minus.conj().T @ Bw @ minus)


def pm_split(sig: SignatureData, window: int) -> Tuple[WindowSplit, WindowSplit, Tuple[int, int]]:
    """C+ = Gamma(ker d), C- = ker d on a window where B is invertible; returns d-minus counts"""
    for k in (0, 1):
        w = sig.splits[k].windows[window]
        if w.dim and np.min(np.abs(w.eigenvalues)) <= sig.splits[k].tolerance:
            raise PreconditionError(f"Window {w.label} contains 0; the +/- split is not defined")
    even, odd = _split_parity(sig, 0, window), _split_parity(sig, 1, window)
    return even, odd, (even.dims[1], odd.dims[1])


def log_graded_det(sig: SignatureData, window: int, theta: float) -> complex:
    """LDet(B+_0) - LDet(-B-_0) with the branch fixed by theta"""
    even, _, _ = pm_split(sig, window)
    return ldet_branch(even.B_plus, theta) - ldet_branch(-even.B_minus, theta)


def graded_det(sig: SignatureData, window: int, theta: Optional[float] = None) -> TorsionScalar:
    if theta is None:
        theta = torsion_angle(sig).theta
    return TorsionScalar.from_log(log_graded_det(sig, window, theta))


def torsion_angle(sig: SignatureData, windows: Optional[Sequence[int]] = None,
                  sector: Tuple[float, float] = (-math.pi, 0.0), policy: str = "max_gap") -> AngleSector:
    """Agmon angle for the union of the window spectra of B"""
    if windows is None:
        windows = range(1, sig.window_count) if sig.cuts else range(sig.window_count)
    spectra = [sig.window_spectrum(j) for j in windows]
    return choose_agmon_angle(spectra, sector=sector, policy=policy)


@dataclass
class EtaResult:
    eta0: int
    m_plus: int
    m_minus: int
    m_zero: int
    warnings: List[str] = field(default_factory=list)

    @property
    def twice_eta(self) -> int:
        return self.eta0 + self.m_plus - self.m_minus + self.m_zero

    @property
    def eta(self) -> float:
        return self.twice_eta / 2.0

    def __add__(self, other: "EtaResult") -> "EtaResult":
        return EtaResult(
            self.eta0 + other.eta0, self.m_plus + other.m_plus, self.m_minus + other.m_minus,
            self.m_zero + other.m_zero, self.warnings + other.warnings,
        )

    def to_dict(self) -> dict:
        return {
            "eta0": self.eta0, "m_plus": self.m_plus, "m_minus": self.m_minus, "m_zero": self.m_zero,
            "eta": self.eta, "warnings": list(self.warnings),
        }


def eta_invariant(D, zero_tol: float = 1e-8, axis_tol: float = AXIS_TOL, warn_tol: float = AXIS_WARN) -> EtaResult:
    """Signed count of eigenvalues by real part, with the imaginary-axis and zero corrections"""
    D = np.asarray(D, dtype=complex)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise PreconditionError(f"eta needs a square matrix, got shape {D.shape}")
    result = EtaResult(0, 0, 0, 0)
    if D.shape[0] == 0:
        return result
    eigenvalues = np.linalg.eigvals(D)
    radius = max(1.0, float(np.max(np.abs(eigenvalues))))
    for z in eigenvalues:
        r = abs(z)
        if r <= zero_tol * radius:
            result.m_zero += 1
            continue
        ratio = abs(z.real) / r
        if ratio <= axis_tol:
            if z.imag > 0:
                result.m_plus += 1
            else:
                result.m_minus += 1
            continue
        if ratio <= warn_tol:
            message = f"eigenvalue {z:.6g} is {ratio:.2e} off the imaginary axis"
            logger.warning("eta axis ambiguity: %s", message)
            result.warnings.append(message)
        result.eta0 += 1 if z.real > 0 else -1
    return result


def eta_window(sig: SignatureData, window: int) -> EtaResult:
    """eta of B0 restricted to one window"""
    return eta_invariant(sig.restricted(0, window))


def xi_window(sig: SignatureData, window: int, theta: float) -> complex:
    """1/2 [LDet((B+_0)^2, 2 theta) - LDet((B+_1)^2, 2 theta)]"""
    even, odd, _ = pm_split(sig, window)
    return 0.5 * (ldet_branch(even.B_plus @ even.B_plus, 2 * theta)
                  - ldet_branch(odd.B_plus @ odd.B_plus, 2 * theta))


@dataclass
class EtaIdentity:
    theta: float
    ldet: complex
    xi: complex
    eta: EtaResult
    d_minus: Tuple[int, int]

    @property
    def predicted(self) -> complex:
        return self.xi - 1j * math.pi * self.eta.eta - 0.5j * math.pi * (self.d_minus[0] - self.d_minus[1])

    @property
    def residual(self) -> float:
        return abs(self.ldet - self.predicted)


def eta_identity_check(sig: SignatureData, window: int, theta: Optional[float] = None) -> EtaIdentity:
    """LDet_gr = xi - i pi eta - (i pi / 2)(d-_0 - d-_1) on a window

    theta defaults to the low-edge angle of (-pi/2, 0), which leaves no eigenvalue of B
    in the solid angles the identity excludes.
    """
    if theta is None:
        theta = choose_agmon_angle([sig.window_spectrum(window)], sector=(-math.pi / 2, 0.0), policy="low_edge").theta
    elif not -math.pi / 2 < theta < 0:
        raise PreconditionError(f"eta identity needs theta in (-pi/2, 0), got {theta}")
    _, _, d_minus = pm_split(sig, window)
    return EtaIdentity(
        theta=theta,
        ldet=log_graded_det(sig, window, theta),
        xi=xi_window(sig, window, theta),
        eta=eta_window(sig, window),
        d_minus=d_minus,
    )


# ---------------------------------------------------------------------------
# rho_H and rho_an


def window_subcomplex(sig: SignatureData, window: int) -> Tuple[Z2Complex, Chirality, np.ndarray, np.ndarray]:
    """The subcomplex spanned by one window, in window coordinates"""
    s0, s1 = sig.splits
    w0, w1 = s0.windows[window], s1.windows[window]
    cx, gamma = sig.cx, sig.gamma
    V0, V1, L0, L1 = w0.basis, w1.basis, w0.coords, w1.coords
    scale = differential_scale(cx)
    sub = Z2Complex(
        chop(L1 @ np.asarray(cx.d0) @ V0, scale),
        chop(L0 @ np.asarray(cx.d1) @ V1, scale),
        V0.conj().T @ np.asarray(cx.metric(0)) @ V0,
        V1.conj().T @ np.asarray(cx.metric(1)) @ V1,
        name=f"{cx.name}{w0.label}",
    )
    sub_gamma = Chirality(L1 @ np.asarray(gamma.g0) @ V0, L0 @ np.asarray(gamma.g1) @ V1)
    return sub, sub_gamma, V0, V1


def transport_to_cohomology(sig: SignatureData, window: int, x: DetElement, sub_reference: CohomologySpaces,
                            reference: Optional[CohomologySpaces] = None) -> DetElement:
    """Re-express an element of Det(H) of a window subcomplex on the reference of H(d)"""
    cx = sig.cx
    dec = decompose(cx)
    reference = reference or cohomology(cx, dec)
    _, _, V0, V1 = window_subcomplex(sig, window)
    factor = inclusion_factor(cx, (V0, V1), sub_reference, dec, reference)
    return graded_element("H", reference.dims[0], reference.dims[1], x.coeff * factor)


def rho_gamma_window(sig: SignatureData, window: int = 0,
                     reference: Optional[CohomologySpaces] = None) -> DetElement:
    """Refined torsion of the window subcomplex, carried to Det(H(d))"""
    sub, sub_gamma, _, _ = window_subcomplex(sig, window)
    sub_reference = cohomology(sub)
    rho_sub = refined_torsion(sub, sub_gamma, reference=sub_reference)
    return transport_to_cohomology(sig, window, rho_sub, sub_reference, reference)


@dataclass
class TorsionReport:
    """Everything computed for one complex at one cut"""
    cut: float
    theta: float
    rho_low: DetElement
    det_gr: TorsionScalar
    rho_H: DetElement
    eta: EtaResult
    xi: complex
    d_minus: Tuple[int, int]
    windows: List[dict]
    cohomology_dims: Tuple[int, int]

    @property
    def log_rho_H(self) -> complex:
        return cmath.log(self.rho_low.to_complex()) + self.det_gr.log

    def to_dict(self) -> dict:
        rho = self.rho_H.to_complex()
        return {
            "cut": self.cut,
            "theta": self.theta,
            "rho_H": TorsionScalar.from_complex(rho).to_dict(),
            "rho_low": TorsionScalar.from_complex(self.rho_low.to_complex()).to_dict(),
            "det_gr": self.det_gr.to_dict(),
            "eta": self.eta.to_dict(),
            "xi": [self.xi.real, self.xi.imag],
            "d_minus": list(self.d_minus),
            "windows": self.windows,
            "cohomology_dims": list(self.cohomology_dims),
        }


def torsion_report(cx: Z2Complex, gamma: Chirality, cut: float = 0.0, theta: Optional[float] = None,
                   reference: Optional[CohomologySpaces] = None) -> TorsionReport:
    sig = build_signature(cx, gamma, [cut])
    high = sig.window_count - 1
    if theta is None:
        theta = torsion_angle(sig, [high]).theta
    rho_low = rho_gamma_window(sig, 0, reference)
    det_gr = graded_det(sig, high, theta)
    xi = xi_window(sig, high, theta)
    eta = eta_window(sig, high)
    _, _, d_minus = pm_split(sig, high)
    rho_H = rho_low.scaled(det_gr.value)
    return TorsionReport(
        cut=cut, theta=theta, rho_low=rho_low, det_gr=det_gr, rho_H=rho_H, eta=eta, xi=xi,
        d_minus=d_minus, windows=sig.summary(), cohomology_dims=tuple(rho_low.dims),
    )


def rho_H(cx: Z2Complex, gamma: Chirality, cut: float = 0.0, theta: Optional[float] = None) -> DetElement:
    """Det_gr over (cut, inf) times the refined torsion of the [0, cut] window"""
    return torsion_report(cx, gamma, cut, theta).rho_H


def rho_an(cx: Z2Complex, gamma: Chirality, cut: float = 0.0, theta: Optional[float] = None,
           eta_trivial: float = 0.0, rank: int = 1) -> DetElement:
    """rho_H times exp(i pi rank eta_trivial)"""
    return rho_H(cx, gamma, cut, theta).scaled(cmath.exp(1j * math.pi * rank * eta_trivial))


def rho_H_spread(cx: Z2Complex, gamma: Chirality, cuts: Sequence[float], theta: Optional[float] = None) -> float:
    """Largest relative deviation of rho_H across several cuts"""
    values = [rho_H(cx, gamma, c, theta).to_complex() for c in cuts]
    ref = values[0]
    return max(abs(v - ref) for v in values) / max(abs(ref), 1e-300)


def detgr_multiplicativity(cx: Z2Complex, gamma: Chirality, lower: float, upper: float,
                           theta: Optional[float] = None) -> float:
    """|LDet_gr(lower, inf) - LDet_gr(lower, upper] - LDet_gr(upper, inf)|"""
    if not lower < upper:
        raise PreconditionError("Multiplicativity needs lower < upper")
    fine = build_signature(cx, gamma, [lower, upper])
    coarse = build_signature(cx, gamma, [lower])
    if theta is None:
        theta = torsion_angle(fine, [1, 2]).theta
    whole = log_graded_det(coarse, 1, theta)
    parts = log_graded_det(fine, 1, theta) + log_graded_det(fine, 2, theta)
    return abs(whole - parts)


@dataclass
class ParityRecord:
    d_minus: Tuple[int, int]
    twice_eta: int
    dim_high: int
    dim_low: int

    @property
    def D(self) -> int:
        return self.d_minus[0] - self.d_minus[1]

    @property
    def holds(self) -> bool:
        return ((self.D - self.dim_high) % 2 == 0
                and (self.twice_eta - self.dim_high) % 2 == 0
                and (self.twice_eta + self.D) % 2 == 0)

    @property
    def low_form_holds(self) -> bool:
        return (self.D - self.dim_low) % 2 == 0


def small_eigenvalue_parity(sig: SignatureData, window: Optional[int] = None) -> ParityRecord:
    """Parity congruences between d-minus counts, 2 eta and the window dimension"""
    window = sig.window_count - 1 if window is None else window
    _, _, d_minus = pm_split(sig, window)
    low = sum(sig.splits[0].windows[j].dim for j in range(window))
    return ParityRecord(
        d_minus=d_minus,
        twice_eta=eta_window(sig, window).twice_eta,
        dim_high=sig.splits[0].windows[window].dim,
        dim_low=low,
    )


# ---------------------------------------------------------------------------
# Flux deformation d_v = e^{v beta} d e^{-v beta}


def deformed_complex(cx: Z2Complex, beta: Tuple[np.ndarray, np.ndarray], v: float) -> Z2Complex:
    E0 = scipy.linalg.expm(v * beta[0])
    E1 = scipy.linalg.expm(v * beta[1])
    d0 = E1 @ np.asarray(cx.d0) @ np.linalg.inv(E0)
    d1 = E0 @ np.asarray(cx.d1) @ np.linalg.inv(E1)
    return Z2Complex(d0, d1, cx.G0, cx.G1, name=f"{cx.name}[v={v:g}]")


def window_supertrace(sig: SignatureData, beta: Tuple[np.ndarray, np.ndarray], windows: Sequence[int]) -> complex:
    """Graded trace of beta compressed to a union of windows"""
    total = 0j
    for j in windows:
        total += np.trace(sig.splits[0].restrict(beta[0], j)) - np.trace(sig.splits[1].restrict(beta[1], j))
    return complex(total)


@dataclass
class FluxVariation:
    h: float
    dxi: complex
    dlog_low: complex
    supertrace_high: complex
    supertrace_low: complex
    supertrace_total: complex

    @property
    def residuals(self) -> Tuple[float, float, float]:
        return (
            abs(self.dxi + self.supertrace_high),
            abs(self.dlog_low + self.supertrace_low),
            abs(self.dxi + self.dlog_low + self.supertrace_total),
        )

    @property
    def drift(self) -> complex:
        """d/dv log(e^xi rho_low)"""
        return self.dxi + self.dlog_low

    @property
    def ledger_residual(self) -> float:
        """(+Tr_s beta|low) - (-Tr_s beta|high) - Tr_s beta"""
        return abs(self.supertrace_low + self.supertrace_high - self.supertrace_total)

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "residuals": list(self.residuals),
            "drift": [self.drift.real, self.drift.imag],
            "supertrace": [self.supertrace_total.real, self.supertrace_total.imag],
            "ledger_residual": self.ledger_residual,
        }


def _log_ratio(a: complex, b: complex) -> complex:
    z = cmath.log(a / b)
    return complex(z.real, math.remainder(z.imag, 2 * math.pi))


def flux_variation_check(cx: Z2Complex, gamma: Chirality, beta: Tuple[np.ndarray, np.ndarray], cut: float,
                         h: float = 1e-4, theta: Optional[float] = None) -> FluxVariation:
    """Central differences of xi and of the transported low-window torsion along d_v"""
    cx = cx.as_float()
    beta = (np.asarray(beta[0], dtype=complex), np.asarray(beta[1], dtype=complex))
    if beta[0].shape != (cx.n0, cx.n0) or beta[1].shape != (cx.n1, cx.n1):
        raise PreconditionError("beta must preserve the grading")
    sig = build_signature(cx, gamma, [cut])
    high = sig.window_count - 1
    if theta is None:
        theta = torsion_angle(sig, [high]).theta
    base = cohomology(cx)
    base_dims = [sig.window_dims(j) for j in range(sig.window_count)]

    def evaluate(v: float) -> Tuple[complex, complex]:
        cv = deformed_complex(cx, beta, v)
        sv = build_signature(cv, gamma, [cut])
        if [sv.window_dims(j) for j in range(sv.window_count)] != base_dims:
            raise CutThroughClusterError(f"Window dimensions change along the deformation at v={v:g}")
        reps = tuple(scipy.linalg.expm(v * beta[k]) @ base.reps[k] for k in (0, 1))
        reference = CohomologySpaces(reps=reps, dims=base.dims)
        return xi_window(sv, high, theta), rho_gamma_window(sv, 0, reference).to_complex()

    xi_plus, rho_plus = evaluate(h)
    xi_minus, rho_minus = evaluate(-h)
    return FluxVariation(
        h=h,
        dxi=(xi_plus - xi_minus) / (2 * h),
        dlog_low=_log_ratio(rho_plus, rho_minus) / (2 * h),
        supertrace_high=window_supertrace(sig, beta, range(1, sig.window_count)),
        supertrace_low=window_supertrace(sig, beta, [0]),
        supertrace_total=complex(np.trace(beta[0]) - np.trace(beta[1])),
    )


# ---------------------------------------------------------------------------
# Informational eta tracking along families


@dataclass
class EtaTrack:
    parameters: List[float]
    twice_eta: List[int]
    d_minus: List[Tuple[int, int]]
    crossings: List[float]

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "twice_eta": self.twice_eta,
            "d_minus": [list(d) for d in self.d_minus],
            "crossings": self.crossings,
        }


def eta_jump_tracker(family: Callable[[float], Tuple[Z2Complex, Chirality]], parameters: Sequence[float],
                     cut: float) -> EtaTrack:
    """eta and d-minus of the (cut, inf) window along a family; records where they jump

    A parameter whose cut hits the spectrum is logged and skipped.
    """
    track = EtaTrack([], [], [], [])
    for t in parameters:
        cx, gamma = family(t)
        try:
            sig = build_signature(cx, gamma, [cut])
            high = sig.window_count - 1
            record = small_eigenvalue_parity(sig, high)
        except CutThroughClusterError as e:
            logger.warning("Skipping t=%g: %s", t, e)
            continue
        if track.twice_eta and (record.twice_eta != track.twice_eta[-1] or record.d_minus != track.d_minus[-1]):
            track.crossings.append(float(t))
        track.parameters.append(float(t))
        track.twice_eta.append(record.twice_eta)
        track.d_minus.append(record.d_minus)
    return track
