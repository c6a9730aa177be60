"""Exception hierarchy shared by the library and the CLI."""


class LcmIdentError(Exception):
    """Base class for all errors raised by lcm_ident."""


class ModelError(LcmIdentError, ValueError):
    """Malformed model document or a model violating its invariants."""


class InapplicableError(LcmIdentError, ValueError):
    """A method was called on a model outside its preconditions."""


class DegenerateError(LcmIdentError, ArithmeticError):
    """Input lies on an exceptional (measure-zero) set: zero denominators,
    repeated roots, singular matrices. Callers are expected to resample."""


class NonRealRootsError(DegenerateError):
    """A root computation left the real line."""


class InvariantViolation(LcmIdentError, RuntimeError):
    """An exact identity that must hold did not. Indicates a bug."""
