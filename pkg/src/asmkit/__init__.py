"""Abstract state machines: parse, run, and transform them, then check the
transformations by co-simulation."""
from .algorithm import Algorithm, PreconditionError
from .bundle import AlgorithmBundle, load_bundle
from .core import FALSE, NIL, TRUE, EnumValue, State, Symbol, Term, is_means_fit_effective
from .interp import OracleEnv, oracle_dispatch_run, run, step
from .normalize import normalize
from .parser import CheckError, ParseError, parse, print_unit
from .prune import prune
from .separate import separate_all, separate_one
from .serialize import classify_program, serialize

__all__ = [
    "Algorithm", "AlgorithmBundle", "CheckError", "EnumValue", "FALSE", "NIL", "OracleEnv",
    "ParseError", "PreconditionError", "State", "Symbol", "TRUE", "Term", "classify_program",
    "is_means_fit_effective", "load_bundle", "normalize", "oracle_dispatch_run", "parse",
    "print_unit", "prune", "run", "separate_all", "separate_one", "serialize", "step",
]
