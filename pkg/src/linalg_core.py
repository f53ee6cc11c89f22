"""
Scalar-field backends and the matrix kernels used across the lab:
deterministic kernels/images, spectral windows and branch-cut log-determinants
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import (
    CutThroughClusterError,
    DefectiveAmbiguityError,
    NoAdmissibleAngleError,
    PreconditionError,
    RankAmbiguityError,
    SpectrumOnCutError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
RANK_SAFETY = 64.0
RANK_BAND = 10.0


def rank_threshold(shape: Tuple[int, int], smax: float) -> float:
    """Singular values at or below this count as zero"""
    return np.finfo(float).eps * max(shape[0], shape[1], 1) * smax * RANK_SAFETY


class FloatBackend:
    """Double precision complex matrices (numpy complex128)"""

    name = "float"
    exact = False

    def matrix(self, rows, shape: Optional[Tuple[int, int]] = None) -> np.ndarray:
        A = np.array(rows, dtype=complex)
        if shape is not None:
            A = A.reshape(shape)
        return A

    def zeros(self, m: int, n: int) -> np.ndarray:
        return np.zeros((m, n), dtype=complex)

    def eye(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=complex)

    def shape(self, A) -> Tuple[int, int]:
        return tuple(A.shape)

    def matmul(self, A, B):
        return A @ B

    def add(self, A, B):
        return A + B

    def sub(self, A, B):
        return A - B

    def scale(self, A, s):
        return A * complex(s)

    def adjoint(self, A):
        return A.conj().T

    def hstack(self, blocks: Sequence, rows: int):
        blocks = [b for b in blocks if b.shape[1] > 0]
        if not blocks:
            return self.zeros(rows, 0)
        return np.hstack(blocks)

    def vstack(self, blocks: Sequence, cols: int):
        blocks = [b for b in blocks if b.shape[0] > 0]
        if not blocks:
            return self.zeros(0, cols)
        return np.vstack(blocks)

    def submatrix(self, A, rows: Sequence[int], cols: Sequence[int]):
        return A[np.ix_(list(rows), list(cols))]

    def det(self, A) -> complex:
        if A.shape[0] == 0:
            return 1.0 + 0j
        return complex(np.linalg.det(A))

    def inv(self, A):
        if A.shape[0] == 0:
            return self.zeros(0, 0)
        return np.linalg.inv(A)

    def solve_in_span(self, M, Y):
        """X with M X = Y, for Y inside the column span of M (M full column rank)"""
        if M.shape[1] == 0:
            return self.zeros(0, Y.shape[1])
        X, *_ = np.linalg.lstsq(M, Y, rcond=None)
        return X

    def kernel_image(self, A) -> Tuple[np.ndarray, np.ndarray]:
        return float_kernel_image(A)

    def scalar(self, re=0, im=0) -> complex:
        return complex(re, im)

    def one(self):
        return 1.0 + 0j

    def zero(self):
        return 0j

    def conj(self, s):
        return complex(s).conjugate()

    def to_complex(self, s) -> complex:
        return complex(s)

    def trace(self, A):
        return complex(np.trace(A)) if A.shape[0] else 0j

    def entry(self, A, i: int, j: int):
        return complex(A[i, j])

    def is_zero(self, s, scale: float = 1.0) -> bool:
        return abs(complex(s)) <= 1e-12 * max(scale, 1.0)

    def to_numpy(self, A) -> np.ndarray:
        return np.asarray(A, dtype=complex)


class ExactBackend:
    """Gaussian rationals through sympy DomainMatrix over QQ_I"""

    name = "exact"
    exact = True

    def __init__(self):
        self.domain = QQ_I

    def element(self, value):
        if isinstance(value, tuple):
            re, im = value
            return QQ_I(self._rational(re), self._rational(im))
        if isinstance(value, complex):
            return QQ_I(self._rational(value.real), self._rational(value.imag))
        if hasattr(value, "x") and hasattr(value, "y"):
            return value
        return QQ_I(self._rational(value), 0)

    @staticmethod
    def _rational(value):
        if isinstance(value, float):
            if not value.is_integer():
                raise PreconditionError(f"Exact backend needs rational input, got {value!r}")
            return int(value)
        if isinstance(value, str):
            if "/" in value:
                p, q = value.split("/")
                return QQ(int(p), int(q))
            return int(value)
        return value

    def matrix(self, rows, shape: Optional[Tuple[int, int]] = None) -> DomainMatrix:
        rows = [[self.element(v) for v in row] for row in rows]
        if shape is None:
            shape = (len(rows), len(rows[0]) if rows else 0)
        if shape[0] == 0:
            rows = []
        return DomainMatrix(rows, shape, QQ_I)

    def zeros(self, m: int, n: int) -> DomainMatrix:
        return DomainMatrix([[QQ_I.zero] * n for _ in range(m)], (m, n), QQ_I)

    def eye(self, n: int) -> DomainMatrix:
        return DomainMatrix(
            [[QQ_I.one if i == j else QQ_I.zero for j in range(n)] for i in range(n)], (n, n), QQ_I
        )

    def shape(self, A) -> Tuple[int, int]:
        return tuple(A.shape)

    def rows(self, A) -> List[list]:
        m, n = A.shape
        if m == 0 or n == 0:
            return [[] for _ in range(m)]
        return A.to_dense().to_list()

    def matmul(self, A, B):
        m, k = A.shape
        k2, n = B.shape
        if k != k2:
            raise PreconditionError(f"Shape mismatch {A.shape} @ {B.shape}")
        if m == 0 or n == 0 or k == 0:
            return self.zeros(m, n)
        return (A.to_dense() * B.to_dense()).to_dense()

    def add(self, A, B):
        if 0 in A.shape:
            return self.zeros(*A.shape)
        return (A.to_dense() + B.to_dense()).to_dense()

    def sub(self, A, B):
        if 0 in A.shape:
            return self.zeros(*A.shape)
        return (A.to_dense() - B.to_dense()).to_dense()

    def scale(self, A, s):
        m, n = A.shape
        s = self.element(s)
        return self.matrix([[v * s for v in row] for row in self.rows(A)], (m, n))

    def adjoint(self, A):
        m, n = A.shape
        rows = self.rows(A)
        return self.matrix([[self.conj(rows[i][j]) for i in range(m)] for j in range(n)], (n, m))

    def hstack(self, blocks: Sequence, rows: int):
        blocks = [b for b in blocks if b.shape[1] > 0]
        if not blocks:
            return self.zeros(rows, 0)
        block_rows = [self.rows(b) for b in blocks]
        data = [sum((br[i] for br in block_rows), []) for i in range(rows)]
        return self.matrix(data, (rows, sum(b.shape[1] for b in blocks)))

    def vstack(self, blocks: Sequence, cols: int):
        blocks = [b for b in blocks if b.shape[0] > 0]
        if not blocks:
            return self.zeros(0, cols)
        data = []
        for b in blocks:
            data.extend(self.rows(b))
        return self.matrix(data, (len(data), cols))

    def submatrix(self, A, rows: Sequence[int], cols: Sequence[int]):
        data = self.rows(A)
        return self.matrix([[data[i][j] for j in cols] for i in rows], (len(rows), len(cols)))

    def det(self, A):
        if A.shape[0] == 0:
            return QQ_I.one
        return A.to_dense().det()

    def inv(self, A):
        if A.shape[0] == 0:
            return self.zeros(0, 0)
        if self.det(A) == QQ_I.zero:
            raise PreconditionError("Matrix is singular")
        return A.to_dense().inv().to_dense()

    def solve_in_span(self, M, Y):
        if M.shape[1] == 0:
            return self.zeros(0, Y.shape[1])
        Mh = self.adjoint(M)
        return self.matmul(self.inv(self.matmul(Mh, M)), self.matmul(Mh, Y))

    def kernel_image(self, A):
        """Kernel from the free columns of the reduced row echelon form, image from pivot columns"""
        m, n = A.shape
        if m == 0 or n == 0:
            return self.eye(n), self.zeros(m, 0)
        R, pivots = A.to_dense().rref()
        R = self.rows(R)
        pivots = list(pivots)
        free = [j for j in range(n) if j not in pivots]
        kernel_cols = []
        for f in free:
            v = [QQ_I.zero] * n
            v[f] = QQ_I.one
            for row, p in enumerate(pivots):
                v[p] = -R[row][f]
            kernel_cols.append(v)
        kernel = self.matrix([[kernel_cols[c][i] for c in range(len(free))] for i in range(n)], (n, len(free)))
        image = self.submatrix(A, range(m), pivots)
        return kernel, image

    def scalar(self, re=0, im=0):
        return QQ_I(self._rational(re), self._rational(im))

    def one(self):
        return QQ_I.one

    def zero(self):
        return QQ_I.zero

    def conj(self, s):
        s = self.element(s)
        return QQ_I(s.x, -s.y)

    def to_complex(self, s) -> complex:
        s = self.element(s)
        return complex(float(s.x), float(s.y))

    def trace(self, A):
        total = QQ_I.zero
        data = self.rows(A)
        for i in range(A.shape[0]):
            total += data[i][i]
        return total

    def entry(self, A, i: int, j: int):
        return self.rows(A)[i][j]

    def is_zero(self, s, scale: float = 1.0) -> bool:
        return self.element(s) == QQ_I.zero

    def to_numpy(self, A) -> np.ndarray:
        m, n = A.shape
        data = self.rows(A)
        out = np.zeros((m, n), dtype=complex)
        for i in range(m):
            for j in range(n):
                out[i, j] = self.to_complex(data[i][j])
        return out


Backend = Union[FloatBackend, ExactBackend]

_BACKENDS = {"float": FloatBackend, "exact": ExactBackend}


def get_backend(name: str = "float") -> Backend:
    """Backend factory"""
    try:
        return _BACKENDS[name]()
    except KeyError:
        raise ValueError(f"Unknown backend '{name}'. Available: {', '.join(sorted(_BACKENDS))}")


def float_kernel_image(A) -> Tuple[np.ndarray, np.ndarray]:
    """Kernel and image bases from the SVD, with an ambiguity band around the rank threshold"""
    A = np.asarray(A, dtype=complex)
    m, n = A.shape
    if m == 0 or n == 0:
        return np.eye(n, dtype=complex), np.zeros((m, 0), dtype=complex)
    U, s, Vh = np.linalg.svd(A)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return np.eye(n, dtype=complex), np.zeros((m, 0), dtype=complex)
    thr = rank_threshold((m, n), smax)
    close = s[(s > thr / RANK_BAND) & (s < thr * RANK_BAND)]
    if close.size:
        raise RankAmbiguityError(
            f"Ill-conditioned rank: singular value(s) {close.tolist()} near threshold {thr:.3e}",
            close,
        )
    r = int(np.sum(s > thr))
    return Vh[r:].conj().T.copy(), U[:, :r].copy()


def kernel_image(A, backend: Optional[Backend] = None):
    """Deterministic kernel and image bases of A"""
    if backend is None:
        backend = ExactBackend() if isinstance(A, DomainMatrix) else FloatBackend()
    return backend.kernel_image(A)


def numerical_rank(A) -> int:
    return float_kernel_image(A)[1].shape[1]


# ---------------------------------------------------------------------------
# Spectral windows


@dataclass
class SpectralWindow:
    """One window of a spectral split: |eigenvalue| in (lower, upper]"""
    index: int
    lower: float
    upper: Optional[float]
    basis: np.ndarray
    coords: np.ndarray
    restricted: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def label(self) -> str:
        upper = "inf)" if self.upper is None else f"{self.upper:g}]"
        opener = "[" if self.index == 0 else "("
        return f"{opener}{self.lower:g},{upper}"

    def contains(self, modulus: float) -> bool:
        above = modulus >= self.lower if self.index == 0 else modulus > self.lower
        return above and (self.upper is None or modulus <= self.upper)


@dataclass
class SpectralSplit:
    """Generalized-eigenspace decomposition of an operator by eigenvalue modulus"""
    dimension: int
    cuts: List[float]
    tolerance: float
    windows: List[SpectralWindow] = field(default_factory=list)

    def restrict(self, M: np.ndarray, index: int) -> np.ndarray:
        """Matrix of an operator commuting with the split operator on one window"""
        w = self.windows[index]
        return w.coords @ M @ w.basis

    def dims(self) -> List[int]:
        return [w.dim for w in self.windows]

    def summary(self) -> List[dict]:
        return [
            {
                "window": w.label,
                "dim": w.dim,
                "min_modulus": float(np.min(np.abs(w.eigenvalues))) if w.dim else None,
                "max_modulus": float(np.max(np.abs(w.eigenvalues))) if w.dim else None,
            }
            for w in self.windows
        ]


def generalized_eigenspaces(A, cuts: Iterable[float] = (), tol: Optional[float] = None,
                            rel_tol: float = 1e-8) -> SpectralSplit:
    """Split C^n into sums of generalized eigenspaces with |eigenvalue| in consecutive windows

    Windows are [0,c1], (c1,c2], ..., (cm,inf). Numerically zero eigenvalues always
    fall in the first window. Each window basis comes from an ordered complex Schur
    form, so it is orthonormal and invariant.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise PreconditionError(f"Spectral split needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    cuts = sorted(set(float(c) for c in cuts))
    if any(c < 0 for c in cuts):
        raise PreconditionError("Spectral cuts must be non-negative")

    if n == 0:
        eigenvalues = np.zeros(0, dtype=complex)
    else:
        T, _ = scipy.linalg.schur(A, output="complex")
        eigenvalues = np.diag(T).copy()
    radius = float(np.max(np.abs(eigenvalues))) if n else 0.0
    tol_abs = float(tol) if tol is not None else rel_tol * radius

    for c in cuts:
        if c <= tol_abs:
            continue
        clash = eigenvalues[np.abs(np.abs(eigenvalues) - c) <= tol_abs]
        if clash.size:
            raise CutThroughClusterError(f"Cut at {c:g} passes through an eigenvalue cluster", clash)

    def window_of(z: complex) -> int:
        r = abs(z)
        if r <= tol_abs:
            return 0
        for j, c in enumerate(cuts):
            if r <= c:
                return j
        return len(cuts)

    counts = [0] * (len(cuts) + 1)
    for z in eigenvalues:
        counts[window_of(z)] += 1

    bounds = [0.0] + cuts
    split = SpectralSplit(dimension=n, cuts=cuts, tolerance=tol_abs)
    bases = []
    for j, count in enumerate(counts):
        upper = cuts[j] if j < len(cuts) else None
        if count == 0:
            basis = np.zeros((n, 0), dtype=complex)
            restricted = np.zeros((0, 0), dtype=complex)
        else:
            T, Q, sdim = scipy.linalg.schur(A, output="complex", sort=lambda z, j=j: window_of(z) == j)
            if sdim != count:
                raise DefectiveAmbiguityError(
                    f"Ordered Schur form put {sdim} eigenvalues in window {j}, expected {count}",
                    eigenvalues,
                )
            basis = Q[:, :count]
            restricted = T[:count, :count]
        bases.append(basis)
        split.windows.append(SpectralWindow(
            index=j, lower=bounds[j], upper=upper, basis=basis,
            coords=np.zeros((0, n), dtype=complex), restricted=restricted,
            eigenvalues=np.diag(restricted).copy(),
        ))

    if n:
        full = np.hstack(bases)
        cond = np.linalg.cond(full)
        if not np.isfinite(cond) or cond > 1e12:
            raise DefectiveAmbiguityError(f"Window bases are nearly dependent (condition {cond:.3e})", eigenvalues)
        L = np.linalg.inv(full)
        start = 0
        for w in split.windows:
            w.coords = L[start:start + w.dim]
            start += w.dim
    logger.debug("Spectral split dims %s with cuts %s", split.dims(), cuts)
    return split


# ---------------------------------------------------------------------------
# Branch-cut logarithms and Agmon angles


def branch_arguments(eigenvalues: np.ndarray, theta: float, tol: float = 1e-10) -> np.ndarray:
    """Arguments of eigenvalues taken in (theta, theta + 2pi)"""
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    shifted = theta + np.mod(np.angle(eigenvalues) - theta, TWO_PI)
    gap = np.minimum(shifted - theta, theta + TWO_PI - shifted)
    on_cut = eigenvalues[gap < tol]
    if on_cut.size:
        raise SpectrumOnCutError(f"Spectrum meets the cut at angle {theta:.6g}", on_cut)
    return shifted


def ldet_branch(A, theta: float, tol: float = 1e-10) -> complex:
    """Sum of log|l| + i arg(l) over eigenvalues with arg in (theta, theta + 2pi)"""
    A = np.asarray(A, dtype=complex)
    if A.shape[0] == 0:
        return 0j
    eigenvalues = np.linalg.eigvals(A)
    moduli = np.abs(eigenvalues)
    if np.any(moduli == 0.0):
        raise PreconditionError("ldet_branch needs an invertible matrix")
    args = branch_arguments(eigenvalues, theta, tol)
    return complex(np.sum(np.log(moduli)), np.sum(args))


@dataclass
class AngleSector:
    """An admissible Agmon angle and its admissibility record"""
    theta: float
    min_gap: float
    sector: Tuple[float, float]
    policy: str
    directions: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "min_gap": self.min_gap, "sector": list(self.sector), "policy": self.policy}


def _eigenvalues_of(item) -> np.ndarray:
    arr = np.asarray(item, dtype=complex)
    if arr.ndim == 2:
        return np.linalg.eigvals(arr) if arr.shape[0] else np.zeros(0, dtype=complex)
    return arr.ravel()


def choose_agmon_angle(spectra: Sequence, sector: Tuple[float, float] = (-math.pi, 0.0),
                       policy: str = "max_gap", min_gap: float = 1e-2,
                       zero_tol: float = 1e-12) -> AngleSector:
    """Pick theta in the open sector keeping both rays theta and theta + pi off the spectrum

    ``spectra`` holds matrices or eigenvalue arrays. ``max_gap`` takes the midpoint of
    the widest free arc (sector ends count as obstacles, ties go to the smaller angle);
    ``low_edge`` takes the midpoint between the lower end and the first eigen-direction,
    so no eigenvalue direction lies in (lower, theta].
    """
    lo, hi = float(sector[0]), float(sector[1])
    if not lo < hi:
        raise PreconditionError(f"Empty sector {sector}")
    values = [_eigenvalues_of(s) for s in spectra]
    eigenvalues = np.concatenate(values) if values else np.zeros(0, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(eigenvalues)))) if eigenvalues.size else 1.0
    nonzero = eigenvalues[np.abs(eigenvalues) > zero_tol * scale]
    directions = sorted(set(float(np.mod(a, math.pi)) for a in np.angle(nonzero)))

    lifted = []
    for p in directions:
        for j in range(-3, 4):
            q = p + j * math.pi
            if lo < q < hi:
                lifted.append(q)
    points = sorted(set([lo, hi] + lifted))

    if policy == "max_gap":
        gaps = [points[i + 1] - points[i] for i in range(len(points) - 1)]
        widest = max(gaps)
        best = next(i for i, g in enumerate(gaps) if g >= widest - 1e-12)
        theta = 0.5 * (points[best] + points[best + 1])
        half = 0.5 * gaps[best]
    elif policy == "low_edge":
        upper = points[1]
        theta = 0.5 * (lo + upper)
        half = 0.5 * (upper - lo)
    else:
        raise ValueError(f"Unknown angle policy '{policy}'")

    if half < min_gap:
        raise NoAdmissibleAngleError(
            f"No admissible angle in ({lo:.6g}, {hi:.6g}): best clearance {half:.3e} rad", nonzero
        )
    clearance = min((_distance_mod_pi(theta, p) for p in directions), default=math.pi / 2)
    return AngleSector(theta=theta, min_gap=clearance, sector=(lo, hi), policy=policy, directions=directions)


def _distance_mod_pi(a: float, b: float) -> float:
    d = abs(np.mod(a - b, math.pi))
    return float(min(d, math.pi - d))


def char_poly(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape[0] == 0:
        return np.ones(1, dtype=complex)
    return np.poly(A)


def window_charpoly_residual(A, split: SpectralSplit) -> float:
    """Coefficient-wise distance between char(A) and the product of window char polys"""
    product = np.ones(1, dtype=complex)
    for w in split.windows:
        product = np.polymul(product, char_poly(w.restricted))
    return float(np.max(np.abs(char_poly(A) - product)))
