"""Size of the Hilbert-space region explored by a time-evolving lattice state.

Subpackages
-----------
special      scalar special functions and the correction Gaussian integral
asymptotics  closed-form large-volume moments, entropies, spectra, ranks
overlap      exact finite-volume moments from the dynamical free energy
ed           dense exact diagonalization of small spin-1/2 chains
cli          command-line front end emitting CSV/JSON experiment tables
"""

from . import asymptotics, ed, overlap, special
from .errors import (
    AccuracyError,
    ConfigError,
    DomainError,
    NoSolutionError,
    QspanError,
    SingularPointError,
    SizeError,
)

__version__ = "0.1.0"

__all__ = [
    "special", "asymptotics", "overlap", "ed",
    "QspanError", "DomainError", "SingularPointError", "NoSolutionError",
    "AccuracyError", "SizeError", "ConfigError",
    "__version__",
]
