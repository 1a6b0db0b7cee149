"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (used by the CLI as the
``error_code: message`` prefix) and an ``exit_code`` for the CLI process.
"""


class GpeError(Exception):
    code = "error"
    exit_code = 2


class InputError(GpeError, ValueError):
    """Bad user input or data; CLI exit code 2."""


class InvariantError(GpeError, RuntimeError):
    """An internal invariant was violated; CLI exit code 3."""

    code = "invariant"
    exit_code = 3


# -- ptx frontend -------------------------------------------------------------

class LexError(InputError):
    code = "lex_error"

    def __init__(self, message, line, column):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column


class ParseError(InputError):
    code = "parse_error"

    def __init__(self, line, expected, found):
        super().__init__(f"line {line}: expected {expected}, found {found!r}")
        self.line = line
        self.expected = expected
        self.found = found


class UnresolvedLabel(InputError):
    code = "unresolved_label"

    def __init__(self, label, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"branch to undefined label {label!r}{where}")
        self.label = label
        self.line = line


class UndeclaredRegister(InputError):
    code = "undeclared_register"

    def __init__(self, name, line=None):
        super().__init__(f"register {name} used at line {line} is not declared")
        self.name = name
        self.line = line


class UnknownOpcode(InputError):
    code = "unknown_opcode"

    def __init__(self, mnemonic):
        super().__init__(f"unsupported opcode {mnemonic!r}")
        self.mnemonic = mnemonic


class KernelNotFound(InputError):
    code = "kernel_not_found"


# -- cfg ----------------------------------------------------------------------

class IrreducibleControlFlow(InputError):
    code = "irreducible_cfg"

    def __init__(self, edge):
        super().__init__(f"edge {edge[0]}->{edge[1]} enters a cycle whose target does not dominate its source")
        self.edge = edge


# -- analyzer -----------------------------------------------------------------

class BranchUnresolved(InputError):
    """A guard outside any loop-exit decision evaluated to Unknown."""

    code = "branch_unresolved"

    def __init__(self, index, register):
        super().__init__(f"guard {register} of instruction {index} is not statically known")
        self.index = index
        self.register = register


class TripCountUnresolved(BranchUnresolved):
    code = "trip_count_unresolved"

    def __init__(self, header, register, index=None):
        InputError.__init__(
            self, f"trip count of loop at block {header} depends on unknown value {register}")
        self.header = header
        self.register = register
        self.index = index


class TripCountExceeded(InputError):
    code = "trip_count_exceeded"

    def __init__(self, header, limit):
        super().__init__(f"loop at block {header} exceeded {limit} trips")
        self.header = header
        self.limit = limit


class UnboundValue(InputError):
    code = "unbound_value"


class NonTermination(InputError):
    code = "non_termination"


class Overflow(InputError, OverflowError):
    code = "overflow"


# -- workload -----------------------------------------------------------------

class ShapeError(InputError):
    code = "shape_error"

    def __init__(self, layer_index, reason):
        super().__init__(f"layer {layer_index}: {reason}")
        self.layer_index = layer_index
        self.reason = reason


class ClockOutOfRange(InputError):
    code = "clock_out_of_range"

    def __init__(self, clock, low, high, gpu=""):
        super().__init__(f"clock {clock} MHz outside valid band [{low}, {high}] MHz {gpu}".rstrip())
        self.clock = clock
        self.low = low
        self.high = high


# -- predictors ---------------------------------------------------------------

class EmptyDataset(InputError):
    code = "empty_dataset"


class BadK(InputError):
    code = "bad_k"


class SchemaMismatch(InputError):
    code = "schema_mismatch"


class LengthMismatch(InputError):
    code = "length_mismatch"


class ZeroActual(InputError):
    code = "zero_actual"


class DegenerateVariance(InputError):
    code = "degenerate_variance"


class BadFolds(InputError):
    code = "bad_folds"
