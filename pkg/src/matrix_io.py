"""
Text formats for matrices and complexes

Matrix: a "rows cols" line, then row-major entries "re,im" separated by whitespace.
Exact entries are written "p/q,r/s". Complex files start with "n0 n1 has_metric" and an
optional fourth flag has_chirality, followed by d0, d1, then G0, G1 and g0, g1 when flagged.
Blank lines and lines starting with '#' are ignored.
"""
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
import sympy
from sympy.polys.domains import QQ, QQ_I

from .errors import PreconditionError
from .linalg_core import Backend, ExactBackend, FloatBackend
from .z2complex import Chirality, Z2Complex


def _lines(text: str) -> Iterator[str]:
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def _exact_part(token: str):
    r = sympy.Rational(token)
    return QQ(int(r.p), int(r.q))


def parse_entry(token: str, backend: Backend):
    try:
        re, im = token.split(",") if "," in token else (token, "0")
        if backend.exact:
            return QQ_I(_exact_part(re), _exact_part(im))
        return complex(float(sympy.Rational(re)) if "/" in re else float(re),
                       float(sympy.Rational(im)) if "/" in im else float(im))
    except (ValueError, TypeError) as e:
        raise PreconditionError(f"Cannot parse matrix entry '{token}': {e}")


def _read_matrix(lines: Iterator[str], backend: Backend):
    try:
        header = next(lines).split()
    except StopIteration:
        raise PreconditionError("Unexpected end of input, expected a 'rows cols' line")
    if len(header) != 2:
        raise PreconditionError(f"Matrix header must be 'rows cols', got '{' '.join(header)}'")
    m, n = int(header[0]), int(header[1])
    tokens: List[str] = []
    while len(tokens) < m * n:
        try:
            tokens.extend(next(lines).split())
        except StopIteration:
            raise PreconditionError(f"Matrix {m}x{n} ended after {len(tokens)} entries")
    if len(tokens) != m * n:
        raise PreconditionError(f"Matrix {m}x{n} has {len(tokens)} entries")
    values = [parse_entry(t, backend) for t in tokens]
    rows = [values[i * n:(i + 1) * n] for i in range(m)]
    if backend.exact:
        return backend.matrix(rows, (m, n))
    return np.array(rows, dtype=complex).reshape(m, n)


def read_matrix(text: str, backend: Optional[Backend] = None):
    return _read_matrix(_lines(text), backend or FloatBackend())


def _format_rational(q) -> str:
    num, den = int(QQ.numer(q)), int(QQ.denom(q))
    return str(num) if den == 1 else f"{num}/{den}"


def format_entry(value, backend: Backend) -> str:
    if backend.exact:
        value = backend.element(value)
        return f"{_format_rational(value.x)},{_format_rational(value.y)}"
    z = complex(value)
    return f"{z.real:.17g},{z.imag:.17g}"


def write_matrix(A, backend: Optional[Backend] = None) -> str:
    backend = backend or FloatBackend()
    m, n = backend.shape(A)
    rows = backend.rows(A) if backend.exact else np.asarray(A).tolist()
    out = [f"{m} {n}"]
    for row in rows:
        out.append(" ".join(format_entry(v, backend) for v in row))
    return "\n".join(out) + "\n"


def read_complex(text: str, backend: Optional[Backend] = None) -> Tuple[Z2Complex, Optional[Chirality]]:
    backend = backend or FloatBackend()
    lines = _lines(text)
    try:
        header = next(lines).split()
    except StopIteration:
        raise PreconditionError("Empty complex file")
    if len(header) not in (3, 4):
        raise PreconditionError(f"Complex header must be 'n0 n1 has_metric [has_chirality]', got '{' '.join(header)}'")
    n0, n1, has_metric = int(header[0]), int(header[1]), bool(int(header[2]))
    has_chirality = len(header) == 4 and bool(int(header[3]))
    d0 = _read_matrix(lines, backend)
    d1 = _read_matrix(lines, backend)
    G0 = G1 = None
    if has_metric:
        G0 = _read_matrix(lines, backend)
        G1 = _read_matrix(lines, backend)
    cx = Z2Complex(d0, d1, G0, G1, backend)
    if (cx.n0, cx.n1) != (n0, n1):
        raise PreconditionError(f"Header dims {(n0, n1)} do not match d0 of shape {backend.shape(d0)}")
    gamma = None
    if has_chirality:
        gamma = Chirality(_read_matrix(lines, backend), _read_matrix(lines, backend))
    return cx, gamma


def write_complex(cx: Z2Complex, gamma: Optional[Chirality] = None) -> str:
    be = cx.backend
    parts = [f"{cx.n0} {cx.n1} {int(cx.has_metric)}" + (" 1" if gamma is not None else "") + "\n"]
    parts.append(write_matrix(cx.d0, be))
    parts.append(write_matrix(cx.d1, be))
    if cx.has_metric:
        parts.append(write_matrix(cx.metric(0), be))
        parts.append(write_matrix(cx.metric(1), be))
    if gamma is not None:
        parts.append(write_matrix(gamma.g0, be))
        parts.append(write_matrix(gamma.g1, be))
    return "".join(parts)


def load_complex(path: str, backend_name: str = "float") -> Tuple[Z2Complex, Optional[Chirality]]:
    backend = ExactBackend() if backend_name == "exact" else FloatBackend()
    file_path = Path(path)
    if not file_path.exists():
        raise PreconditionError(f"Complex file not found: {path}")
    return read_complex(file_path.read_text(), backend)
