"""
Z2-graded complexes: decompositions, the canonical isomorphism phi, chirality
operators and the refined torsion, direct sums, variation and duality
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .detline import (
    alpha_graded,
    DetElement,
    as_complex,
    fuse_graded,
    graded_dims,
    graded_element,
    line_element,
    BasedSpace,
    reciprocal,
    scalar_is_zero,
    sign_N_phi,
    sign_R,
    signed,
)
from .errors import PreconditionError, VerificationFailure
from .linalg_core import Backend, FloatBackend

logger = logging.getLogger(__name__)

D2_TOLERANCE = 1e-12


@dataclass
class Z2Complex:
    """C0 -d0-> C1 -d1-> C0 with d1 d0 = 0 and d0 d1 = 0

    ``d0`` is n1 x n0, ``d1`` is n0 x n1. Metrics default to the standard inner products.
    """
    d0: object
    d1: object
    G0: Optional[object] = None
    G1: Optional[object] = None
    backend: Backend = field(default_factory=FloatBackend)
    name: str = "C"

    def __post_init__(self):
        n1, n0 = self.backend.shape(self.d0)
        if self.backend.shape(self.d1) != (n0, n1):
            raise PreconditionError(
                f"d1 must be {n0}x{n1} for d0 of shape {n1}x{n0}, got {self.backend.shape(self.d1)}"
            )
        for k, G in ((0, self.G0), (1, self.G1)):
            if G is not None and self.backend.shape(G) != (self.dim(k), self.dim(k)):
                raise PreconditionError(f"G{k} must be {self.dim(k)}x{self.dim(k)}")

    @property
    def n0(self) -> int:
        return self.backend.shape(self.d0)[1]

    @property
    def n1(self) -> int:
        return self.backend.shape(self.d0)[0]

    @property
    def has_metric(self) -> bool:
        return self.G0 is not None or self.G1 is not None

    def dim(self, k: int) -> int:
        return self.n0 if k % 2 == 0 else self.n1

    def d(self, k: int):
        """Differential leaving parity k"""
        return self.d0 if k % 2 == 0 else self.d1

    def metric(self, k: int):
        G = self.G0 if k % 2 == 0 else self.G1
        return G if G is not None else self.backend.eye(self.dim(k))

    def validate(self, tol: float = D2_TOLERANCE) -> None:
        """Check d^2 = 0 (exactly for the exact backend) and positivity of the metrics"""
        be = self.backend
        for k in (0, 1):
            square = be.matmul(self.d(k + 1), self.d(k))
            if be.exact:
                rows = be.rows(square)
                if any(v != be.zero() for row in rows for v in row):
                    raise PreconditionError(f"d{(k + 1) % 2} d{k} is not zero")
            else:
                scale = max(1.0, float(np.linalg.norm(self.d0)) * float(np.linalg.norm(self.d1)))
                if square.size and float(np.max(np.abs(square))) > tol * scale:
                    raise PreconditionError(f"d{(k + 1) % 2} d{k} is not zero (max {np.max(np.abs(square)):.3e})")
        for k in (0, 1):
            G = be.to_numpy(self.metric(k))
            if G.size == 0:
                continue
            if not np.allclose(G, G.conj().T, atol=1e-12 * max(1.0, np.abs(G).max())):
                raise PreconditionError(f"G{k} is not Hermitian")
            if np.min(np.linalg.eigvalsh(0.5 * (G + G.conj().T))) <= 0:
                raise PreconditionError(f"G{k} is not positive definite")

    @property
    def euler_characteristic(self) -> int:
        dims = cohomology(self).dims
        return dims[0] - dims[1]

    def as_float(self) -> "Z2Complex":
        if not self.backend.exact:
            return self
        be = self.backend
        conv = lambda M: None if M is None else be.to_numpy(M)
        return Z2Complex(conv(self.d0), conv(self.d1), conv(self.G0), conv(self.G1), FloatBackend(), self.name)


@dataclass
class Chirality:
    """Parity-swapping involution: g0: C0 -> C1, g1: C1 -> C0"""
    g0: object
    g1: object

    def validate(self, backend: Backend, tol: float = 1e-10) -> None:
        m, n = backend.shape(self.g0)
        if m != n or backend.shape(self.g1) != (n, m):
            raise PreconditionError(f"A chirality needs n0 = n1, got g0 of shape {(m, n)}")
        for prod, label in ((backend.matmul(self.g1, self.g0), "g1 g0"), (backend.matmul(self.g0, self.g1), "g0 g1")):
            diff = backend.sub(prod, backend.eye(n))
            if backend.exact:
                if any(v != backend.zero() for row in backend.rows(diff) for v in row):
                    raise PreconditionError(f"{label} is not the identity")
            elif diff.size and float(np.max(np.abs(diff))) > tol * max(1.0, float(np.abs(prod).max())):
                raise PreconditionError(f"{label} is not the identity (max {np.max(np.abs(diff)):.3e})")

    def is_self_adjoint(self, cx: Z2Complex, tol: float = 1e-10) -> bool:
        """Gamma* = Gamma with respect to the metrics: G0^-1 g0^H G1 = g1"""
        be = cx.backend
        adj = be.matmul(be.inv(cx.metric(0)), be.matmul(be.adjoint(self.g0), cx.metric(1)))
        return _close(be, adj, self.g1, tol)

    def is_unitary(self, cx: Z2Complex, tol: float = 1e-10) -> bool:
        """g0^H G1 g0 = G0"""
        be = cx.backend
        lhs = be.matmul(be.adjoint(self.g0), be.matmul(cx.metric(1), self.g0))
        return _close(be, lhs, cx.metric(0), tol)

    def as_float(self, backend: Optional[Backend] = None) -> "Chirality":
        if isinstance(self.g0, np.ndarray):
            return self
        from .linalg_core import ExactBackend

        backend = backend if backend is not None and backend.exact else ExactBackend()
        return Chirality(backend.to_numpy(self.g0), backend.to_numpy(self.g1))


def chop(M: np.ndarray, scale: float, rel: float = 1e-12) -> np.ndarray:
    """Zero the entries of a restricted differential that are roundoff relative to the parent"""
    M = np.array(M, dtype=complex, copy=True)
    M[np.abs(M) <= rel * scale] = 0
    return M


def differential_scale(cx: Z2Complex) -> float:
    return max(float(np.linalg.norm(cx.backend.to_numpy(cx.d0))), float(np.linalg.norm(cx.backend.to_numpy(cx.d1))))


def _close(be: Backend, A, B, tol: float) -> bool:
    if be.exact:
        return be.rows(be.sub(A, B)) == be.rows(be.zeros(*be.shape(A)))
    A = np.asarray(A)
    if A.size == 0:
        return True
    return float(np.max(np.abs(A - B))) <= tol * max(1.0, float(np.abs(A).max()))


@dataclass
class Decomposition:
    """C^k = B^k + H^k + A^k with B^k = d(A^{k+1}) and B^k + H^k = ker d"""
    B: Tuple[object, object]
    H: Tuple[object, object]
    A: Tuple[object, object]

    def frame(self, be: Backend, k: int):
        """[B | H | A] on parity k"""
        rows = be.shape(self.B[k])[0]
        return be.hstack([self.B[k], self.H[k], self.A[k]], rows)

    def dims(self, be: Backend, k: int) -> Tuple[int, int, int]:
        return be.shape(self.B[k])[1], be.shape(self.H[k])[1], be.shape(self.A[k])[1]


@dataclass
class CohomologySpaces:
    """Reference representatives of H^0(d) and H^1(d)"""
    reps: Tuple[object, object]
    dims: Tuple[int, int]

    @property
    def euler(self) -> int:
        return self.dims[0] - self.dims[1]


def decompose(cx: Z2Complex) -> Decomposition:
    """Metric-orthogonal decomposition with deterministic bases"""
    be = cx.backend
    kernels = []
    A = []
    for k in (0, 1):
        K, _ = be.kernel_image(cx.d(k))
        kernels.append(K)
        # A^k: G-orthogonal complement of ker d in C^k
        constraint = be.matmul(be.adjoint(K), cx.metric(k))
        Ak, _ = be.kernel_image(constraint)
        A.append(Ak)
    B = [be.matmul(cx.d(1), A[1]), be.matmul(cx.d(0), A[0])]
    H = []
    for k in (0, 1):
        K = kernels[k]
        constraint = be.matmul(be.adjoint(B[k]), be.matmul(cx.metric(k), K))
        coords, _ = be.kernel_image(constraint)
        H.append(be.matmul(K, coords))
    dec = Decomposition(B=(B[0], B[1]), H=(H[0], H[1]), A=(A[0], A[1]))
    for k in (0, 1):
        b, h, a = dec.dims(be, k)
        if b + h + a != cx.dim(k):
            raise PreconditionError(f"Decomposition of C{k} has dims {(b, h, a)} for a space of dim {cx.dim(k)}")
    logger.debug("Decomposed %s: dims %s / %s", cx.name, dec.dims(be, 0), dec.dims(be, 1))
    return dec


def shear_decomposition(cx: Z2Complex, dec: Decomposition, X: Sequence, S: Sequence, T: Sequence,
                        U: Optional[Sequence] = None) -> Decomposition:
    """Another valid decomposition: A' = A U + [B|H] X, H' = H S + B T, B' = d A'"""
    be = cx.backend
    A_new = []
    H_new = []
    for k in (0, 1):
        n = cx.dim(k)
        kernel = be.hstack([dec.B[k], dec.H[k]], n)
        Ak = dec.A[k] if U is None else be.matmul(dec.A[k], U[k])
        A_new.append(be.add(Ak, be.matmul(kernel, X[k])))
        H_new.append(be.add(be.matmul(dec.H[k], S[k]), be.matmul(dec.B[k], T[k])))
    B_new = [be.matmul(cx.d(1), A_new[1]), be.matmul(cx.d(0), A_new[0])]
    return Decomposition(B=tuple(B_new), H=tuple(H_new), A=tuple(A_new))


def cohomology(cx: Z2Complex, dec: Optional[Decomposition] = None) -> CohomologySpaces:
    """Canonical reference representatives: the H part of the orthogonal decomposition"""
    dec = dec or decompose(cx)
    be = cx.backend
    return CohomologySpaces(reps=dec.H, dims=(be.shape(dec.H[0])[1], be.shape(dec.H[1])[1]))


def class_coordinates(be: Backend, B, R, V):
    """Y with V = B X + R Y for V inside span[B | R]"""
    n = be.shape(R)[0]
    h = be.shape(R)[1]
    b = be.shape(B)[1]
    Z = be.solve_in_span(be.hstack([B, R], n), V)
    return be.submatrix(Z, range(b, b + h), range(be.shape(V)[1]))


def inclusion_factor(cx: Z2Complex, V: Sequence, sub_reference: CohomologySpaces,
                     dec: Optional[Decomposition] = None, reference: Optional[CohomologySpaces] = None):
    """Coefficient change from a subcomplex reference (columns V_k R_k) to the reference of H(d)"""
    be = cx.backend
    dec = dec or decompose(cx)
    reference = reference or cohomology(cx, dec)
    dets = []
    for k in (0, 1):
        reps = be.matmul(V[k], sub_reference.reps[k])
        dets.append(be.det(class_coordinates(be, dec.B[k], reference.reps[k], reps)))
    return dets[0] * reciprocal(dets[1])


def phi_iso(cx: Z2Complex, dec: Optional[Decomposition], c: DetElement,
            reference: Optional[CohomologySpaces] = None) -> DetElement:
    """The canonical isomorphism Det(C0) x Det(C1)^-1 -> Det(H0) x Det(H1)^-1"""
    be = cx.backend
    dec = dec or decompose(cx)
    reference = reference or cohomology(cx)
    n0, n1 = graded_dims(c)
    if (n0, n1) != (cx.n0, cx.n1):
        raise PreconditionError(f"Element lives on dims {(n0, n1)}, complex has {(cx.n0, cx.n1)}")
    if c.is_zero():
        raise PreconditionError("phi is only applied to nonzero elements")
    det_frame = []
    kappa = []
    for k in (0, 1):
        det_frame.append(be.det(dec.frame(be, k)))
        if scalar_is_zero(det_frame[k]):
            raise PreconditionError(f"Decomposition of C{k} is not a direct sum")
        Y = class_coordinates(be, dec.B[k], reference.reps[k], dec.H[k])
        kappa.append(be.det(Y))
    a0 = be.shape(dec.A[0])[1]
    a1 = be.shape(dec.A[1])[1]
    coeff = c.coeff * kappa[0] * det_frame[1] * reciprocal(kappa[1] * det_frame[0])
    coeff = signed(coeff, sign_N_phi(a0, a1))
    return graded_element("H", reference.dims[0], reference.dims[1], coeff)


def c_gamma(cx: Z2Complex, gamma: Chirality, c0: Optional[DetElement] = None) -> DetElement:
    """(-1)^R(n0) c0 x (Gamma c0)^-1 on Det(C0) x Det(C1)^-1"""
    be = cx.backend
    if cx.n0 != cx.n1:
        raise PreconditionError(f"A chirality needs n0 = n1, got {(cx.n0, cx.n1)}")
    if c0 is None:
        c0 = line_element(BasedSpace("C0", cx.n0), be.one())
    if c0.is_zero():
        raise PreconditionError("c_Gamma needs a nonzero c0")
    det_g0 = be.det(gamma.g0)
    gamma_c0 = c0.coeff * det_g0
    coeff = signed(c0.coeff * reciprocal(gamma_c0), sign_R(cx.n0))
    return graded_element("C", cx.n0, cx.n1, coeff)


def refined_torsion(cx: Z2Complex, gamma: Chirality, c0: Optional[DetElement] = None,
                    dec: Optional[Decomposition] = None,
                    reference: Optional[CohomologySpaces] = None) -> DetElement:
    """rho_Gamma = phi(c_Gamma), an element of Det(H(d))"""
    return phi_iso(cx, dec, c_gamma(cx, gamma, c0), reference)


# ---------------------------------------------------------------------------
# Direct sums


def _block_diag(be: Backend, X, Y):
    (m1, n1), (m2, n2) = be.shape(X), be.shape(Y)
    top = be.hstack([X, be.zeros(m1, n2)], m1)
    bottom = be.hstack([be.zeros(m2, n1), Y], m2)
    return be.vstack([top, bottom], n1 + n2)


def direct_sum(cx: Z2Complex, cy: Z2Complex) -> Z2Complex:
    """C + D with the basis of C followed by that of D in each parity"""
    be = cx.backend
    G0 = G1 = None
    if cx.has_metric or cy.has_metric:
        G0 = _block_diag(be, cx.metric(0), cy.metric(0))
        G1 = _block_diag(be, cx.metric(1), cy.metric(1))
    return Z2Complex(
        _block_diag(be, cx.d0, cy.d0), _block_diag(be, cx.d1, cy.d1), G0, G1, be,
        name=f"({cx.name}+{cy.name})",
    )


def direct_sum_chirality(be: Backend, gamma: Chirality, other: Chirality) -> Chirality:
    return Chirality(_block_diag(be, gamma.g0, other.g0), _block_diag(be, gamma.g1, other.g1))


def direct_sum_reference(be: Backend, cx: Z2Complex, ref: CohomologySpaces,
                         cy: Z2Complex, other: CohomologySpaces) -> CohomologySpaces:
    reps = tuple(_block_diag(be, ref.reps[k], other.reps[k]) for k in (0, 1))
    return CohomologySpaces(reps=reps, dims=(ref.dims[0] + other.dims[0], ref.dims[1] + other.dims[1]))


@dataclass
class DirectSumCheck:
    lhs: DetElement
    rhs: DetElement

    @property
    def residual(self):
        return self.lhs.coeff - self.rhs.coeff


def direct_sum_phi_check(cx: Z2Complex, cy: Z2Complex, c: DetElement, c_other: DetElement) -> DirectSumCheck:
    """phi_{C+D}(fuse(c, c')) against fuse(phi_C(c), phi_D(c'))

    The fusion signs only commute with phi for Euler characteristic zero.
    """
    be = cx.backend
    ref_x, ref_y = cohomology(cx), cohomology(cy)
    if ref_x.euler != 0 or ref_y.euler != 0:
        raise PreconditionError(
            f"Direct-sum compatibility of phi needs Euler characteristic 0, got {ref_x.euler} and {ref_y.euler}"
        )
    total = direct_sum(cx, cy)
    reference = direct_sum_reference(be, cx, ref_x, cy, ref_y)
    lhs = phi_iso(total, decompose(total), fuse_graded(c, c_other), reference)
    rhs = fuse_graded(phi_iso(cx, None, c, ref_x), phi_iso(cy, None, c_other, ref_y))
    return DirectSumCheck(lhs=lhs, rhs=rhs)


def direct_sum_torsion_check(cx: Z2Complex, gamma: Chirality, cy: Z2Complex, other: Chirality) -> DirectSumCheck:
    """rho of the direct-sum chirality against the fused torsions"""
    be = cx.backend
    ref_x, ref_y = cohomology(cx), cohomology(cy)
    total = direct_sum(cx, cy)
    reference = direct_sum_reference(be, cx, ref_x, cy, ref_y)
    lhs = refined_torsion(total, direct_sum_chirality(be, gamma, other), reference=reference)
    rhs = fuse_graded(
        refined_torsion(cx, gamma, reference=ref_x),
        refined_torsion(cy, other, reference=ref_y),
    )
    return DirectSumCheck(lhs=lhs, rhs=rhs)


# ---------------------------------------------------------------------------
# Variation of the chirality


def supertrace(X0, X1, backend: Optional[Backend] = None):
    """Tr(X0) - Tr(X1)"""
    backend = backend or FloatBackend()
    for X in (X0, X1):
        m, n = backend.shape(X)
        if m != n:
            raise PreconditionError(f"Supertrace needs square blocks, got {(m, n)}")
    return backend.trace(X0) - backend.trace(X1)


def chirality_supertrace(gamma_dot: Chirality, gamma: Chirality) -> complex:
    """Tr_s(Gamma' Gamma) = Tr(g1' g0) - Tr(g0' g1)"""
    return complex(np.trace(gamma_dot.g1 @ gamma.g0) - np.trace(gamma_dot.g0 @ gamma.g1))


@dataclass
class VariationResult:
    h: float
    derivative: complex
    predicted: complex
    rho: complex

    @property
    def residual(self) -> float:
        return abs(self.derivative - self.predicted)

    @property
    def relative_residual(self) -> float:
        return self.residual / max(abs(self.rho), 1e-300)


def variation_check(family: Callable[[float], Chirality], cx: Z2Complex, t0: float, h: float,
                    dec: Optional[Decomposition] = None, tol: float = 1e-8) -> VariationResult:
    """Central-difference d/dt rho_Gamma(t) against 1/2 Tr_s(Gamma' Gamma) rho_Gamma(t0)

    One decomposition and one reference are reused along the family.
    """
    cx = cx.as_float()
    dec = dec or decompose(cx)
    reference = cohomology(cx, dec)

    def rho(t: float) -> complex:
        gamma = family(t)
        gamma.validate(cx.backend, tol)
        return refined_torsion(cx, gamma, dec=dec, reference=reference).to_complex()

    plus, minus = family(t0 + h), family(t0 - h)
    gamma_dot = Chirality((plus.g0 - minus.g0) / (2 * h), (plus.g1 - minus.g1) / (2 * h))
    rho0 = rho(t0)
    derivative = (rho(t0 + h) - rho(t0 - h)) / (2 * h)
    predicted = 0.5 * chirality_supertrace(gamma_dot, family(t0)) * rho0
    return VariationResult(h=h, derivative=derivative, predicted=predicted, rho=rho0)


def variation_slope(family: Callable[[float], Chirality], cx: Z2Complex, t0: float,
                    steps: Sequence[float] = (1e-2, 1e-3, 1e-4)) -> Tuple[float, List[VariationResult]]:
    """Log-log slope of the residual against the step size"""
    cx = cx.as_float()
    dec = decompose(cx)
    results = [variation_check(family, cx, t0, h, dec) for h in steps]
    residuals = np.array([max(r.residual, 1e-300) for r in results])
    slope = float(np.polyfit(np.log(np.asarray(steps)), np.log(residuals), 1)[0])
    logger.debug("Variation residuals %s -> slope %.3f", residuals.tolist(), slope)
    return slope, results


# ---------------------------------------------------------------------------
# Duality


def dual_complex(cx: Z2Complex) -> Z2Complex:
    """The tau-dual: dual-C0 = C1*, dual-C1 = C0*, differentials d^H, metrics G^-1"""
    be = cx.backend
    G0 = G1 = None
    if cx.has_metric:
        G0 = be.inv(cx.metric(1))
        G1 = be.inv(cx.metric(0))
    return Z2Complex(be.adjoint(cx.d0), be.adjoint(cx.d1), G0, G1, be, name=f"{cx.name}*")


def dual_chirality(be: Backend, gamma: Chirality) -> Chirality:
    return Chirality(be.adjoint(gamma.g0), be.adjoint(gamma.g1))


def alpha_on_cohomology(cx: Z2Complex, x: DetElement, reference: Optional[CohomologySpaces] = None,
                        dual_reference: Optional[CohomologySpaces] = None) -> DetElement:
    """The tau-linear map Det(H(d)) -> Det(H(d*)) induced by the pairing of representatives"""
    be = cx.backend
    reference = reference or cohomology(cx)
    dual_reference = dual_reference or cohomology(dual_complex(cx))
    h0, h1 = graded_dims(x)
    if (h0, h1) != reference.dims:
        raise PreconditionError(f"Element dims {(h0, h1)} do not match cohomology {reference.dims}")
    if x.is_zero():
        raise PreconditionError("alpha is only applied to nonzero elements")
    R0, R1 = reference.reps
    Rd0, Rd1 = dual_reference.reps
    det_q0 = be.det(be.matmul(be.adjoint(R1), Rd0))
    det_q1 = be.det(be.matmul(be.adjoint(R0), Rd1))
    coeff = alpha_graded(x).coeff * det_q1 * reciprocal(det_q0)
    return graded_element("H*", h1, h0, coeff)


def connection_dual(cx: Z2Complex, gamma: Chirality) -> Z2Complex:
    """d' = Gamma d^dagger Gamma with d^dagger = G^-1 d^H G"""
    be = cx.backend
    G0, G1 = cx.metric(0), cx.metric(1)
    d0p = be.matmul(gamma.g0, be.matmul(be.inv(G0), be.matmul(be.adjoint(cx.d0), be.matmul(G1, gamma.g0))))
    d1p = be.matmul(gamma.g1, be.matmul(be.inv(G1), be.matmul(be.adjoint(cx.d1), be.matmul(G0, gamma.g1))))
    return Z2Complex(d0p, d1p, cx.G0, cx.G1, be, name=f"{cx.name}'")


def riesz_maps(cx: Z2Complex, gamma: Chirality) -> Tuple[object, object]:
    """Psi_0 = g1 G1^-1 and Psi_1 = g0 G0^-1 from the dual complex to the connection dual"""
    be = cx.backend
    return be.matmul(gamma.g1, be.inv(cx.metric(1))), be.matmul(gamma.g0, be.inv(cx.metric(0)))


def riesz_transport(cx: Z2Complex, gamma: Chirality, x: DetElement,
                    dual_reference: Optional[CohomologySpaces] = None,
                    target_reference: Optional[CohomologySpaces] = None) -> DetElement:
    """Push an element of Det(H(d*)) to Det(H(d')) along the chain isomorphism Psi"""
    be = cx.backend
    dual = dual_complex(cx)
    target = connection_dual(cx, gamma)
    dual_reference = dual_reference or cohomology(dual)
    target_dec = decompose(target)
    target_reference = target_reference or cohomology(target, target_dec)
    psi = riesz_maps(cx, gamma)
    dets = []
    for k in (0, 1):
        image = be.matmul(psi[k], dual_reference.reps[k])
        M = class_coordinates(be, target_dec.B[k], target_reference.reps[k], image)
        dets.append(be.det(M))
    coeff = x.coeff * dets[0] * reciprocal(dets[1])
    return graded_element("H'", target_reference.dims[0], target_reference.dims[1], coeff)


@dataclass
class DualityCheck:
    torsion: DetElement
    dual_torsion: DetElement
    alpha_torsion: DetElement
    riesz_torsion: Optional[DetElement] = None
    connection_dual_torsion: Optional[DetElement] = None

    @property
    def alpha_residual(self):
        return self.dual_torsion.coeff - self.alpha_torsion.coeff

    @property
    def riesz_residual(self):
        if self.riesz_torsion is None:
            return None
        return self.riesz_torsion.coeff - self.connection_dual_torsion.coeff

    def max_relative(self) -> float:
        scale = max(abs(self.dual_torsion.to_complex()), 1e-300)
        values = [abs(as_complex(self.alpha_residual)) / scale]
        if self.riesz_torsion is not None:
            values.append(abs(as_complex(self.riesz_residual)) / max(abs(self.connection_dual_torsion.to_complex()), 1e-300))
        return max(values)


def duality_residual(cx: Z2Complex, gamma: Chirality) -> DualityCheck:
    """rho of the dual chirality on the dual complex against alpha(rho)

    When Gamma is unitary for the metrics, Psi also carries alpha(rho) to the torsion
    of Gamma on the connection-dual complex.
    """
    be = cx.backend
    dual = dual_complex(cx)
    reference = cohomology(cx)
    dual_reference = cohomology(dual)
    rho = refined_torsion(cx, gamma, reference=reference)
    rho_dual = refined_torsion(dual, dual_chirality(be, gamma), reference=dual_reference)
    alpha_rho = alpha_on_cohomology(cx, rho, reference, dual_reference)
    check = DualityCheck(torsion=rho, dual_torsion=rho_dual, alpha_torsion=alpha_rho)
    if gamma.is_unitary(cx):
        target = connection_dual(cx, gamma)
        target_reference = cohomology(target)
        check.riesz_torsion = riesz_transport(cx, gamma, alpha_rho, dual_reference, target_reference)
        check.connection_dual_torsion = refined_torsion(target, gamma, reference=target_reference)
    return check


def require_zero(value, be: Backend, message: str, tol: float = 0.0, scale: float = 1.0) -> None:
    """Raise VerificationFailure unless value vanishes (exactly for the exact backend)"""
    if be.exact:
        if not scalar_is_zero(value):
            raise VerificationFailure(f"{message}: residual {value}")
        return
    if abs(as_complex(value)) > tol * max(scale, 1.0):
        raise VerificationFailure(f"{message}: residual {abs(as_complex(value)):.3e}")
