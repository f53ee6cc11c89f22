"""
Exception hierarchy shared by the lab modules and the CLI exit-code mapping
"""
from typing import Iterable, List, Optional


class TorsionLabError(Exception):
    """Base class for all lab errors"""
    exit_code = 1


class PreconditionError(TorsionLabError):
    """Input violates a documented precondition"""
    exit_code = 1


class VerificationFailure(TorsionLabError):
    """An asserted identity did not hold within tolerance"""
    exit_code = 1

    def __init__(self, message: str, case: Optional[dict] = None):
        super().__init__(message)
        self.case = case or {}


class NumericalAmbiguityError(TorsionLabError):
    """The computation refuses to guess: a spectral or rank decision is ambiguous"""
    exit_code = 2

    def __init__(self, message: str, eigenvalues: Optional[Iterable[complex]] = None):
        super().__init__(message)
        self.eigenvalues: List[complex] = [complex(z) for z in (eigenvalues if eigenvalues is not None else [])]

    def __str__(self):
        base = super().__str__()
        if not self.eigenvalues:
            return base
        shown = ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in self.eigenvalues[:8])
        return f"{base} [eigenvalues: {shown}]"


class RankAmbiguityError(NumericalAmbiguityError):
    """A singular value sits too close to the rank threshold"""


class CutThroughClusterError(NumericalAmbiguityError):
    """A spectral cut passes through an eigenvalue cluster"""


class DefectiveAmbiguityError(NumericalAmbiguityError):
    """Invariant subspace extraction or the +/- split could not be trusted"""


class SpectrumOnCutError(NumericalAmbiguityError):
    """An eigenvalue argument lies on the logarithm branch cut"""


class NoAdmissibleAngleError(NumericalAmbiguityError):
    """Eigenvalue rays leave no admissible Agmon angle in the sector"""


def exit_code_for(error: BaseException) -> int:
    """Exit code for an exception raised by a command"""
    if isinstance(error, TorsionLabError):
        return error.exit_code
    return 1
