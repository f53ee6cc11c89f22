"""
Seeded random Z2-graded complexes with chiralities

The generator is splitmix64, so the same seed reproduces the same complex in any
implementation. Exact complexes use Gaussian-integer matrices: d0 = P Q of rank r0,
d1 = K Y N with K spanning ker d0 and N annihilating im d0 from the left, so d^2 = 0
holds exactly and survives conversion to floats.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from sympy.polys.domains import QQ, QQ_I

from .errors import PreconditionError
from .linalg_core import ExactBackend
from .z2complex import Chirality, Z2Complex

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
MAX_ATTEMPTS = 32
UNITS = ((1, 0), (-1, 0), (0, 1), (0, -1))


class SplitMix64:
    """64-bit splitmix generator"""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def integer(self, low: int, high: int) -> int:
        """Uniform on [low, high]"""
        return low + self.next_u64() % (high - low + 1)

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53 random bits"""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        return complex(self.normal(), self.normal()) / math.sqrt(2.0)

    def choice(self, items):
        return items[self.integer(0, len(items) - 1)]


@dataclass
class RandomModel:
    complex: Z2Complex
    gamma: Optional[Chirality]
    seed: int
    ranks: Tuple[int, int]

    def as_float(self) -> "RandomModel":
        gamma = self.gamma.as_float() if self.gamma is not None else None
        return RandomModel(self.complex.as_float(), gamma, self.seed, self.ranks)


def _gaussian_integer_matrix(rng: SplitMix64, be: ExactBackend, m: int, n: int, radius: int):
    rows = [[(rng.integer(-radius, radius), rng.integer(-radius, radius)) for _ in range(n)] for _ in range(m)]
    return be.matrix(rows, (m, n))


def _rank(be: ExactBackend, A) -> int:
    kernel, _ = be.kernel_image(A)
    return be.shape(A)[1] - be.shape(kernel)[1]


def _integral_columns(be: ExactBackend, A):
    """Scale each column by the common denominator of its entries"""
    m, n = be.shape(A)
    rows = be.rows(A)
    for j in range(n):
        denominators = [int(QQ.denom(rows[i][j].x)) for i in range(m)] + [int(QQ.denom(rows[i][j].y)) for i in range(m)]
        factor = QQ_I(math.lcm(*denominators) if denominators else 1, 0)
        for i in range(m):
            rows[i][j] = rows[i][j] * factor
    return be.matrix(rows, (m, n))


def _differentials(rng: SplitMix64, be: ExactBackend, n0: int, n1: int, r0: int, r1: int, radius: int):
    for attempt in range(MAX_ATTEMPTS):
        d0 = be.matmul(_gaussian_integer_matrix(rng, be, n1, r0, radius),
                       _gaussian_integer_matrix(rng, be, r0, n0, radius))
        if _rank(be, d0) != r0:
            continue
        K = _integral_columns(be, be.kernel_image(d0)[0])
        N = be.adjoint(_integral_columns(be, be.kernel_image(be.adjoint(d0))[0]))
        Y = be.matmul(_gaussian_integer_matrix(rng, be, n0 - r0, r1, radius),
                      _gaussian_integer_matrix(rng, be, r1, n1 - r0, radius))
        d1 = be.matmul(K, be.matmul(Y, N))
        if _rank(be, d1) == r1:
            return d0, d1
        logger.debug("Rank draw failed on attempt %d, redrawing", attempt)
    raise PreconditionError(f"Could not draw differentials of ranks {(r0, r1)} in {MAX_ATTEMPTS} attempts")


def unipotent_matrix(rng: SplitMix64, be: ExactBackend, n: int, radius: int, lower: bool):
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                rows[i][j] = (1, 0)
            elif (i > j) == lower:
                rows[i][j] = (rng.integer(-radius, radius), rng.integer(-radius, radius))
            else:
                rows[i][j] = (0, 0)
    return be.matrix(rows, (n, n))


def random_chirality(rng: SplitMix64, be: ExactBackend, n: int, radius: int = 1) -> Chirality:
    """g0 = L D U with unit triangular L, U and unit diagonal D; g1 = g0^-1 is again Gaussian-integer"""
    L = unipotent_matrix(rng, be, n, radius, lower=True)
    U = unipotent_matrix(rng, be, n, radius, lower=False)
    D = be.matrix([[rng.choice(UNITS) if i == j else (0, 0) for j in range(n)] for i in range(n)], (n, n))
    g0 = be.matmul(L, be.matmul(D, U))
    return Chirality(g0, be.inv(g0))


def random_invertible(rng: SplitMix64, be: ExactBackend, n: int, radius: int = 1):
    """L D with unit lower-triangular L and D = diag(1 + i m) for random integers m"""
    L = unipotent_matrix(rng, be, n, radius, lower=True)
    D = be.matrix([[(1, rng.integer(-radius, radius)) if i == j else (0, 0) for j in range(n)] for i in range(n)],
                  (n, n))
    return be.matmul(L, D)


def random_metric(rng: SplitMix64, be: ExactBackend, n: int, radius: int = 1):
    """A^H A + I"""
    A = _gaussian_integer_matrix(rng, be, n, n, radius)
    return be.add(be.matmul(be.adjoint(A), A), be.eye(n))


def random_complex(n0: int, n1: int, r0: int, r1: int, seed: int, radius: int = 2,
                   with_chirality: bool = True, with_metric: bool = False) -> RandomModel:
    """An exact complex with rank d0 = r0 and rank d1 = r1"""
    if min(n0, n1, r0, r1) < 0 or r0 + r1 > min(n0, n1):
        raise PreconditionError(f"Ranks {(r0, r1)} are impossible for dims {(n0, n1)}")
    if with_chirality and n0 != n1:
        raise PreconditionError(f"A chirality needs n0 = n1, got {(n0, n1)}")
    rng = SplitMix64(seed)
    be = ExactBackend()
    d0, d1 = _differentials(rng, be, n0, n1, r0, r1, radius)
    G0 = G1 = None
    if with_metric:
        G0 = random_metric(rng, be, n0)
        G1 = random_metric(rng, be, n1)
    cx = Z2Complex(d0, d1, G0, G1, be, name=f"random{seed}")
    gamma = random_chirality(rng, be, n0) if with_chirality else None
    return RandomModel(cx, gamma, seed, (r0, r1))


def random_unitary(rng: SplitMix64, n: int) -> np.ndarray:
    """Q of a QR factorization with the phases of R moved into Q's columns"""
    M = np.array([[rng.complex_normal() for _ in range(n)] for _ in range(n)], dtype=complex)
    Q, R = np.linalg.qr(M)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def random_unitary_complex(n: int, r0: int, r1: int, seed: int, radius: int = 2) -> RandomModel:
    """Float complex on identity metrics with g0 unitary and g1 = g0^H"""
    model = random_complex(n, n, r0, r1, seed, radius, with_chirality=False)
    rng = SplitMix64(seed ^ 0x5DEECE66D)
    g0 = random_unitary(rng, n)
    return RandomModel(model.complex.as_float(), Chirality(g0, g0.conj().T), seed, (r0, r1))


def random_flux_generator(seed: int, n0: int, n1: int, supertrace: float = 0.0,
                          scale: float = 0.3) -> Tuple[np.ndarray, np.ndarray]:
    """Parity-preserving beta with Tr(beta0) - Tr(beta1) = supertrace"""
    rng = SplitMix64(seed)
    b0 = scale * np.array([[rng.complex_normal() for _ in range(n0)] for _ in range(n0)], dtype=complex)
    b1 = scale * np.array([[rng.complex_normal() for _ in range(n1)] for _ in range(n1)], dtype=complex)
    if n0 == 0:
        raise PreconditionError("Flux generator needs n0 > 0")
    shift = supertrace - (np.trace(b0) - np.trace(b1))
    b0 = b0 + (shift / n0) * np.eye(n0)
    return b0, b1


def chirality_path(gamma: Chirality, seed: int, scale: float = 0.2) -> Callable[[float], Chirality]:
    """t -> (g0 + t X, (g0 + t X)^-1) for a fixed random direction X"""
    base = gamma.as_float()
    n = base.g0.shape[0]
    rng = SplitMix64(seed)
    X = scale * np.array([[rng.complex_normal() for _ in range(n)] for _ in range(n)], dtype=complex)

    def family(t: float) -> Chirality:
        g0 = base.g0 + t * X
        return Chirality(g0, np.linalg.inv(g0))

    return family


def exact_suite_dims(max_dim: int = 3) -> List[Tuple[int, int, int, int]]:
    """All (n0, n1, r0, r1) with n0, n1 <= max_dim"""
    out = []
    for n0 in range(max_dim + 1):
        for n1 in range(max_dim + 1):
            for r0 in range(min(n0, n1) + 1):
                for r1 in range(min(n0, n1) - r0 + 1):
                    out.append((n0, n1, r0, r1))
    return out
