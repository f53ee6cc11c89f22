"""
Laplacians, Ray-Singer window torsions and the Ray-Singer metric on Det(H)
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from .detline import DetElement, graded_element
from .errors import CutThroughClusterError, RankAmbiguityError
from .linalg_core import numerical_rank
from .signature import EtaResult, rho_an, eta_window, build_signature
from .z2complex import (
    Chirality,
    CohomologySpaces,
    Z2Complex,
    chop,
    cohomology,
    connection_dual,
    decompose,
    differential_scale,
    inclusion_factor,
    phi_iso,
)

logger = logging.getLogger(__name__)

ZERO_EIGEN_REL = 1e-11


@dataclass
class LaplacianData:
    delta0: np.ndarray
    delta1: np.ndarray
    adjoints: Tuple[np.ndarray, np.ndarray]

    def block(self, k: int) -> np.ndarray:
        return self.delta0 if k % 2 == 0 else self.delta1


@dataclass
class RSNorm:
    """A positive real in log form"""
    log_value: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def __mul__(self, other: "RSNorm") -> "RSNorm":
        return RSNorm(self.log_value + other.log_value)


def laplacian(cx: Z2Complex) -> LaplacianData:
    """Delta = d^dagger d + d d^dagger with d^dagger = G^-1 d^H G"""
    cx = cx.as_float()
    G0, G1 = np.asarray(cx.metric(0)), np.asarray(cx.metric(1))
    d0, d1 = np.asarray(cx.d0), np.asarray(cx.d1)
    d0_dag = np.linalg.solve(G0, d0.conj().T @ G1) if d0.size else d0.conj().T
    d1_dag = np.linalg.solve(G1, d1.conj().T @ G0) if d1.size else d1.conj().T
    return LaplacianData(
        delta0=d0_dag @ d0 + d1 @ d1_dag,
        delta1=d1_dag @ d1 + d0 @ d0_dag,
        adjoints=(d0_dag, d1_dag),
    )


def _eigen_decomposition(cx: Z2Complex, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of Delta_k with G-orthonormal eigenvectors"""
    cx = cx.as_float()
    n = cx.dim(k)
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    G = np.asarray(cx.metric(k), dtype=complex)
    GD = G @ laplacian(cx).block(k)
    GD = 0.5 * (GD + GD.conj().T)
    w, W = scipy.linalg.eigh(GD, G)
    return w, W


def _zero_threshold(w: np.ndarray) -> float:
    return ZERO_EIGEN_REL * max(1.0, float(np.max(np.abs(w)))) if w.size else 0.0


def _window_vectors(w: np.ndarray, W: np.ndarray, lower: float, upper: Optional[float]) -> np.ndarray:
    thr = _zero_threshold(w)
    floor = max(lower, thr)
    for c in (lower, upper):
        if c is not None and c > thr and np.any(np.abs(w - c) <= 1e-8 * max(1.0, float(np.max(np.abs(w))))):
            raise CutThroughClusterError(f"Cut {c:g} meets the Laplace spectrum", w[np.abs(w - c) <= 1e-6 * max(1.0, c)])
    mask = w > floor
    if upper is not None:
        mask &= w <= upper
    return W[:, mask]


def _logdet_prime(cx: Z2Complex, k: int, W: np.ndarray) -> float:
    """log det' of d^dagger d on span W (W G-orthonormal)"""
    if W.shape[1] == 0:
        return 0.0
    G_next = np.asarray(cx.metric(k + 1))
    dW = np.asarray(cx.d(k)) @ W
    M = dW.conj().T @ G_next @ dW
    eig = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    thr = _zero_threshold(eig)
    kept = eig[eig > thr]
    rank = numerical_rank(dW) if dW.size else 0
    if kept.size != rank:
        raise RankAmbiguityError(
            f"log det' keeps {kept.size} eigenvalues but d has rank {rank} on the window", eig
        )
    return float(np.sum(np.log(kept)))


def rs_window_torsion(cx: Z2Complex, lower: float = 0.0, upper: Optional[float] = None) -> RSNorm:
    """T_I = exp(1/2 sum_k (-1)^(k+1) log det'(d^dagger d on C^k_I)), I = (lower, upper]"""
    cx = cx.as_float()
    total = 0.0
    for k in (0, 1):
        w, W = _eigen_decomposition(cx, k)
        total += (-1) ** (k + 1) * _logdet_prime(cx, k, _window_vectors(w, W, lower, upper))
    logger.debug("Ray-Singer torsion of %s on (%g, %s]: log %.12g", cx.name, lower, upper, 0.5 * total)
    return RSNorm(0.5 * total)


def _low_window(cx: Z2Complex, cut: float) -> Tuple[Z2Complex, Tuple[np.ndarray, np.ndarray]]:
    """Subcomplex of Delta-eigenvalues <= cut in G-orthonormal coordinates"""
    bases = []
    for k in (0, 1):
        w, W = _eigen_decomposition(cx, k)
        if cut > _zero_threshold(w) and np.any(np.abs(w - cut) <= 1e-8 * max(1.0, float(np.max(np.abs(w))))):
            raise CutThroughClusterError(f"Cut {cut:g} meets the Laplace spectrum", w)
        bases.append(W[:, w <= max(cut, _zero_threshold(w))])
    V0, V1 = bases
    G0, G1 = np.asarray(cx.metric(0)), np.asarray(cx.metric(1))
    scale = differential_scale(cx)
    sub = Z2Complex(
        chop(V1.conj().T @ G1 @ np.asarray(cx.d0) @ V0, scale),
        chop(V0.conj().T @ G0 @ np.asarray(cx.d1) @ V1, scale),
        name=f"{cx.name}[0,{cut:g}]",
    )
    return sub, (V0, V1)


def lambda_norm(cx: Z2Complex, x: DetElement, cut: float = 0.0,
                reference: Optional[CohomologySpaces] = None) -> RSNorm:
    """Norm on Det(H) induced through phi by the orthonormal unit of the [0, cut] window"""
    cx = cx.as_float()
    dec = decompose(cx)
    reference = reference or cohomology(cx, dec)
    sub, V = _low_window(cx, cut)
    sub_reference = cohomology(sub)
    unit = graded_element("C", sub.n0, sub.n1, 1.0 + 0j)
    image = phi_iso(sub, None, unit, sub_reference)
    scale = image.coeff * inclusion_factor(cx, V, sub_reference, dec, reference)
    return RSNorm(math.log(abs(x.to_complex())) - math.log(abs(scale)))


def rs_metric_norm(cx: Z2Complex, x: DetElement, cut: float = 0.0,
                   reference: Optional[CohomologySpaces] = None) -> RSNorm:
    """||x||_cut times T over (cut, inf)"""
    return lambda_norm(cx, x, cut, reference) * rs_window_torsion(cx, cut)


def harmonic_factor(cx: Z2Complex, reference: Optional[CohomologySpaces] = None) -> complex:
    """Coefficient of the unit volume of orthonormal harmonic representatives"""
    cx = cx.as_float()
    dec = decompose(cx)
    reference = reference or cohomology(cx, dec)
    _, V = _low_window(cx, 0.0)
    harmonic = CohomologySpaces(reps=(np.eye(V[0].shape[1]), np.eye(V[1].shape[1])),
                                dims=(V[0].shape[1], V[1].shape[1]))
    return complex(inclusion_factor(cx, V, harmonic, dec, reference))


def mathai_wu_element(cx: Z2Complex, reference: Optional[CohomologySpaces] = None) -> DetElement:
    """T^-1 times the harmonic unit volume element"""
    cx = cx.as_float()
    reference = reference or cohomology(cx)
    coeff = harmonic_factor(cx, reference) / rs_window_torsion(cx).value
    return graded_element("H", reference.dims[0], reference.dims[1], coeff)


@dataclass
class NormComparison:
    norm: RSNorm
    predicted: float
    chirality_defect: float
    eta: EtaResult

    @property
    def relative_residual(self) -> float:
        expected = self.predicted * self.chirality_defect
        return abs(self.norm.value - expected) / expected


def chirality_defect(cx: Z2Complex, gamma: Chirality) -> float:
    """||c0|| / ||Gamma c0||, equal to 1 when Gamma is unitary for the metrics"""
    cx = cx.as_float()
    g0 = np.asarray(gamma.as_float().g0)
    det_G0 = np.linalg.det(np.asarray(cx.metric(0))).real if cx.n0 else 1.0
    det_G1 = np.linalg.det(np.asarray(cx.metric(1))).real if cx.n1 else 1.0
    det_g0 = abs(np.linalg.det(g0)) if cx.n0 else 1.0
    return math.sqrt(det_G0 / (det_g0 ** 2 * det_G1))


def rs_norm_of_rho_an(cx: Z2Complex, gamma: Chirality, cut: float = 0.0, eta_trivial: float = 0.0,
                      rank: int = 1) -> NormComparison:
    """||rho_an||^RS against exp(pi Im eta)

    Finite eta counts are real, so the prediction is 1 scaled by the chirality defect.
    """
    cx = cx.as_float()
    gamma = gamma.as_float()
    reference = cohomology(cx)
    x = rho_an(cx, gamma, cut, None, eta_trivial, rank)
    sig = build_signature(cx, gamma, [cut])
    eta = eta_window(sig, sig.window_count - 1)
    predicted = math.exp(math.pi * complex(eta.eta).imag)
    return NormComparison(
        norm=rs_metric_norm(cx, x, cut, reference),
        predicted=predicted,
        chirality_defect=chirality_defect(cx, gamma),
        eta=eta,
    )


def rs_duality_check(cx: Z2Complex, gamma: Chirality, cut: float = 0.0) -> float:
    """|log T(connection dual) - log T| over (cut, inf)"""
    cx = cx.as_float()
    gamma = gamma.as_float()
    dual = connection_dual(cx, gamma)
    return abs(rs_window_torsion(dual, cut).log_value - rs_window_torsion(cx, cut).log_value)


def norm_duality_check(cx: Z2Complex, gamma: Chirality, cut: float = 0.0, eta_trivial: float = 0.0) -> float:
    """|ratio of ||rho_an|| on the complex and on its connection dual - exp(2 pi Im eta)|"""
    cx = cx.as_float()
    gamma = gamma.as_float()
    dual = connection_dual(cx, gamma)
    own = rs_norm_of_rho_an(cx, gamma, cut, eta_trivial)
    other = rs_norm_of_rho_an(dual, gamma, cut, eta_trivial)
    ratio = own.norm.value / other.norm.value
    predicted = math.exp(2 * math.pi * complex(own.eta.eta).imag)
    return abs(ratio - predicted)
