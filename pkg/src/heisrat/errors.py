"""Exception types shared across the package."""


class HeisratError(Exception):
    pass


class ParseError(HeisratError):
    """Malformed element, word, automaton or instance input."""


class CapExceeded(HeisratError):
    """An enumeration hit its configured cap.  Raise the cap or give up."""


class NotAccepted(HeisratError):
    """Word rejected by the automaton it was supposed to be accepted by."""


class DimensionMismatch(HeisratError):
    """Semilinear operands of different ambient dimension."""


class NotAbelian(HeisratError):
    """Letters were required to commute pairwise and do not."""


class NotFiniteIndex(HeisratError):
    """Subgroup quotient did not close into a finite coset table."""


class MonotonicityViolated(HeisratError):
    """A threshold functional took a negative value on a letter."""


class SelectionEmpty(HeisratError):
    """No candidate loop on a cone edge; indicates a classification bug."""


class MNotFound(HeisratError):
    """No separator exponent with opposite-sign area drifts within the cap."""
