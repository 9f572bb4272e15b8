"""User-facing error taxonomy.

Each exception carries the exact message surfaced through the CLI and the
HTTP API.  Messages are part of the tool's contract and must not be
reworded.
"""


class CertSynthError(Exception):
    """Base class for all reportable tool errors."""


class InvalidSpacesError(CertSynthError):
    MESSAGE = "Provided spaces are not valid. Please provide valid lower and upper bounds"

    def __init__(self):
        super().__init__(self.MESSAGE)


class ThetaShapeError(CertSynthError):
    def __init__(self, n_monomials: int, n_states: int):
        super().__init__(f"Theta_x should be of shape ({n_monomials}, {n_states})")


class ThetaIdentityError(CertSynthError):
    MESSAGE = "Theta_x does not satisfy M(x) = Theta(x) * x"

    def __init__(self):
        super().__init__(self.MESSAGE)


class ThetaConstructionError(CertSynthError):
    MESSAGE = "Theta cannot be constructed: constant monomial present"

    def __init__(self):
        super().__init__(self.MESSAGE)


class MonomialSeparatorError(CertSynthError):
    MESSAGE = "Monomial terms should be split by semicolon"

    def __init__(self):
        super().__init__(self.MESSAGE)


class MonomialVariableError(CertSynthError):
    MESSAGE = "Monomials must be in terms of x1 (to xn)"

    def __init__(self):
        super().__init__(self.MESSAGE)


class MonomialParseError(CertSynthError):
    MESSAGE = "Invalid monomial terms"

    def __init__(self):
        super().__init__(self.MESSAGE)


class SampleCountError(CertSynthError):
    """Too few samples relative to the row dimension of the data."""

    LIFTED = "The number of samples, T, must be greater than the number of monomial terms, N"
    LINEAR = "The number of samples, T, must be greater than the number of states, n"

    def __init__(self, kind: str):
        super().__init__(self.LIFTED if kind == "lifted" else self.LINEAR)


class RankDeficientError(CertSynthError):
    LIFTED = "The N0 data is not full row-rank"
    LINEAR = "The X0 data is not full row-rank"

    def __init__(self, kind: str):
        super().__init__(self.LIFTED if kind == "lifted" else self.LINEAR)


class FileParseError(CertSynthError):
    MESSAGE = "Unable to parse uploaded file(s)"

    def __init__(self):
        super().__init__(self.MESSAGE)


class SolutionFailure(CertSynthError):
    MESSAGE = "Solution Failure"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.MESSAGE}: {detail}" if detail else self.MESSAGE)


class NoSosDecomposition(CertSynthError):
    MESSAGE = "No SOS decomposition found"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.MESSAGE}: {detail}" if detail else self.MESSAGE)


class ConstraintsNotSos(CertSynthError):
    MESSAGE = "Constraints are not sum-of-squares"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.MESSAGE}: {detail}" if detail else self.MESSAGE)


UNKNOWN_ERROR = "An unknown error occurred"
