"""
Determinant lines in coordinates: elements, fusion isomorphisms, sign exponents
and the tau-duality maps alpha/beta
"""
import logging
from dataclasses import dataclass
from typing import Tuple

from sympy.polys.domains import QQ_I

from .errors import PreconditionError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Scalars shared by both backends


def is_exact_scalar(c) -> bool:
    return hasattr(c, "x") and hasattr(c, "y")


def tau(c):
    """The field involution (complex conjugation)"""
    if is_exact_scalar(c):
        return QQ_I(c.x, -c.y)
    return complex(c).conjugate()


def signed(c, exponent: int):
    return c if exponent % 2 == 0 else -c


def reciprocal(c):
    if scalar_is_zero(c):
        raise PreconditionError("Cannot invert the zero element")
    if is_exact_scalar(c):
        return QQ_I.one / c
    return 1.0 / complex(c)


def scalar_is_zero(c) -> bool:
    if is_exact_scalar(c):
        return c == QQ_I.zero
    return complex(c) == 0


def as_complex(c) -> complex:
    if is_exact_scalar(c):
        return complex(float(c.x), float(c.y))
    return complex(c)


# ---------------------------------------------------------------------------
# Sign exponents


def sign_N(dim_a0: int, dim_a1: int) -> int:
    """1/2 [a0(a0-1) + a1(a1+1)] mod 2"""
    return ((dim_a0 * (dim_a0 - 1) + dim_a1 * (dim_a1 + 1)) // 2) % 2


def sign_N_phi(dim_a0: int, dim_a1: int) -> int:
    """1/2 [a0(a0+1) + a1(a1-1)] mod 2, the exponent applied by the canonical isomorphism

    Equals sign_N + a0 + a1 mod 2.
    """
    return ((dim_a0 * (dim_a0 + 1) + dim_a1 * (dim_a1 - 1)) // 2) % 2


def sign_M(dim_c1: int, dim_d0: int) -> int:
    """Fusion sign of Det(C0) x Det(C1)^-1 x Det(D0) x Det(D1)^-1"""
    return (dim_c1 * dim_d0) % 2


def sign_R(dim_c0: int) -> int:
    return (dim_c0 * (dim_c0 + 1) // 2) % 2


def sign_F(dim_a0: int, dim_a1: int) -> int:
    """Exponent relating rho_Gamma and Det_gr for an acyclic complex with n0 = a0 + a1; always 0"""
    return (sign_R(dim_a0 + dim_a1) + dim_a0 * dim_a1 + sign_N_phi(dim_a0, dim_a1) + dim_a1) % 2


@dataclass(frozen=True)
class SignExponents:
    N: int
    M: int
    R: int
    F: int

    @classmethod
    def for_dims(cls, dim_a0: int, dim_a1: int, dim_c0: int, dim_c1: int, dim_d0: int = 0) -> "SignExponents":
        return cls(
            N=sign_N(dim_a0, dim_a1),
            M=sign_M(dim_c1, dim_d0),
            R=sign_R(dim_c0),
            F=sign_F(dim_a0, dim_a1),
        )


# ---------------------------------------------------------------------------
# Based spaces and determinant elements


@dataclass(frozen=True)
class BasedSpace:
    """A coordinate space with its standard basis as the reference basis"""
    identifier: str
    dimension: int

    def __post_init__(self):
        if self.dimension < 0:
            raise ValueError(f"Negative dimension for space {self.identifier}")

    def dual(self) -> "BasedSpace":
        if self.identifier.endswith("*"):
            return BasedSpace(self.identifier[:-1], self.dimension)
        return BasedSpace(self.identifier + "*", self.dimension)

    def plus(self, other: "BasedSpace") -> "BasedSpace":
        return BasedSpace(f"({self.identifier}+{other.identifier})", self.dimension + other.dimension)


@dataclass(frozen=True)
class DetElement:
    """coeff times the tensor word of reference wedges (and their inverses)"""
    word: Tuple[Tuple[BasedSpace, int], ...]
    coeff: object

    def __post_init__(self):
        for space, exponent in self.word:
            if exponent not in (1, -1):
                raise ValueError(f"Exponent must be +1 or -1, got {exponent}")

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(space.dimension for space, _ in self.word)

    @property
    def identifiers(self) -> Tuple[str, ...]:
        return tuple(space.identifier for space, _ in self.word)

    def is_zero(self) -> bool:
        return scalar_is_zero(self.coeff)

    def with_coeff(self, coeff) -> "DetElement":
        return DetElement(self.word, coeff)

    def scaled(self, factor) -> "DetElement":
        return DetElement(self.word, self.coeff * factor)

    def same_line(self, other: "DetElement") -> bool:
        return [(s.dimension, e) for s, e in self.word] == [(s.dimension, e) for s, e in other.word]

    def ratio(self, other: "DetElement"):
        """self / other for two elements of the same line"""
        if not self.same_line(other):
            raise PreconditionError(f"Elements live on different lines: {self.identifiers} vs {other.identifiers}")
        return self.coeff * reciprocal(other.coeff)

    def to_complex(self) -> complex:
        return as_complex(self.coeff)

    def to_dict(self) -> dict:
        z = self.to_complex()
        return {
            "word": [[s.identifier, s.dimension, e] for s, e in self.word],
            "coeff": [z.real, z.imag],
        }


def line_element(space: BasedSpace, coeff, exponent: int = 1) -> DetElement:
    return DetElement(((space, exponent),), coeff)


def graded_element(prefix: str, n0: int, n1: int, coeff) -> DetElement:
    """An element of Det(V0) x Det(V1)^-1"""
    return DetElement(((BasedSpace(f"{prefix}0", n0), 1), (BasedSpace(f"{prefix}1", n1), -1)), coeff)


def graded_dims(x: DetElement) -> Tuple[int, int]:
    if len(x.word) != 2 or x.word[0][1] != 1 or x.word[1][1] != -1:
        raise PreconditionError(f"Expected a word Det(V0) x Det(V1)^-1, got {x.identifiers}")
    return x.word[0][0].dimension, x.word[1][0].dimension


def _single(x: DetElement, exponent: int) -> BasedSpace:
    if len(x.word) != 1 or x.word[0][1] != exponent:
        raise PreconditionError(f"Expected a single-space word with exponent {exponent}, got {x.word}")
    return x.word[0][0]


def invert(x: DetElement) -> DetElement:
    """(c e)^-1 = c^-1 e^-1"""
    return DetElement(tuple((s, -e) for s, e in x.word), reciprocal(x.coeff))


# ---------------------------------------------------------------------------
# Fusion


def fuse(v: DetElement, w: DetElement) -> DetElement:
    """Det(V) x Det(W) -> Det(V+W), reference basis of V followed by that of W"""
    V = _single(v, 1)
    W = _single(w, 1)
    return line_element(V.plus(W), v.coeff * w.coeff)


def fuse_swapped(w: DetElement, v: DetElement) -> DetElement:
    """Fuse in W+V order and re-express on the V+W reference"""
    V = _single(v, 1)
    W = _single(w, 1)
    coeff = signed(w.coeff * v.coeff, V.dimension * W.dimension)
    return line_element(V.plus(W), coeff)


def fuse_graded(x: DetElement, y: DetElement) -> DetElement:
    """Det(C0)Det(C1)^-1 x Det(D0)Det(D1)^-1 -> Det(C0+D0)Det(C1+D1)^-1"""
    (C0, _), (C1, _) = x.word
    (D0, _), (D1, _) = y.word
    graded_dims(x)
    graded_dims(y)
    coeff = signed(x.coeff * y.coeff, sign_M(C1.dimension, D0.dimension))
    return DetElement(((C0.plus(D0), 1), (C1.plus(D1), -1)), coeff)


# ---------------------------------------------------------------------------
# tau-duality


def alpha_line(x: DetElement) -> DetElement:
    """alpha_V: Det(V*) -> Det(V)^-1, s e* -> tau(s) e^-1"""
    Vstar = _single(x, 1)
    return line_element(Vstar.dual(), tau(x.coeff), -1)


def alpha_line_inverse(x: DetElement) -> DetElement:
    """alpha_V^-1: Det(V)^-1 -> Det(V*), t e^-1 -> tau(t) e*"""
    V = _single(x, -1)
    return line_element(V.dual(), tau(x.coeff), 1)


def beta_line(x: DetElement) -> DetElement:
    """beta_V: Det(V) -> Det(V*)^-1, c e -> (-1)^dim V tau(c) (e*)^-1"""
    V = _single(x, 1)
    return line_element(V.dual(), signed(tau(x.coeff), V.dimension), -1)


def alpha_graded(x: DetElement) -> DetElement:
    """Det(V0)Det(V1)^-1 -> Det(V1*)Det(V0*)^-1

    v0 x v1^-1 goes to (-1)^(dim V0 dim V1) alpha^-1(v1^-1) x beta(v0).
    """
    d0, d1 = graded_dims(x)
    (V0, _), (V1, _) = x.word
    coeff = signed(tau(x.coeff), d0 * d1 + d0)
    return DetElement(((V1.dual(), 1), (V0.dual(), -1)), coeff)


def alpha_beta_identity(x: DetElement):
    """(alpha^-1(v^-1))^-1 and (-1)^dim V beta(v); the two coefficients must agree"""
    V = _single(x, 1)
    left = invert(alpha_line_inverse(invert(x)))
    right = beta_line(x)
    return left.coeff, signed(right.coeff, V.dimension)


def adjoint_transport(T, v: DetElement, backend=None):
    """T* alpha_W^-1((Tv)^-1) / alpha_V^-1(v^-1) for a bijection T: V -> W; equals 1"""
    from .linalg_core import ExactBackend, FloatBackend

    if backend is None:
        backend = ExactBackend() if is_exact_scalar(v.coeff) else FloatBackend()
    V = _single(v, 1)
    m, n = backend.shape(T)
    if m != n or n != V.dimension:
        raise PreconditionError(f"T must be a square map on V (dim {V.dimension}), got shape {(m, n)}")
    det_T = backend.det(T)
    if scalar_is_zero(det_T):
        raise PreconditionError("adjoint_transport needs a bijective T")
    W = BasedSpace(f"T({V.identifier})", n)
    Tv = line_element(W, v.coeff * det_T)
    pulled_back = alpha_line_inverse(invert(Tv))
    det_T_adjoint = backend.det(backend.adjoint(T))
    transported = line_element(V.dual(), pulled_back.coeff * det_T_adjoint)
    reference = alpha_line_inverse(invert(v))
    return transported.coeff * reciprocal(reference.coeff)


def dual_fusion_sides(v: DetElement, w: DetElement):
    """Both sides of (mu(v x w))^-1 = alpha(mu*(alpha^-1(v^-1) x alpha^-1(w^-1)))"""
    left = invert(fuse(v, w))
    fused_duals = fuse(alpha_line_inverse(invert(v)), alpha_line_inverse(invert(w)))
    right = alpha_line(fused_duals)
    return left.coeff, right.coeff
