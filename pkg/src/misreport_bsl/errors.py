"""Exception types. Each carries a short machine-readable ``code``."""


class MisreportError(Exception):
    code = "ERROR"


class EpidemicOverflow(MisreportError, OverflowError):
    code = "OVERFLOW"

    def __init__(self, msg="epidemic curve overflow"):
        super().__init__(msg)


class EmptySeries(MisreportError, ValueError):
    code = "EMPTY"

    def __init__(self, msg="empty series"):
        super().__init__(msg)


class SimulationDiverged(MisreportError, FloatingPointError):
    code = "DIVERGED"

    def __init__(self, msg="simulation diverged"):
        super().__init__(msg)


class DegenerateSeries(MisreportError, ValueError):
    code = "DEGENERATE"

    def __init__(self, msg="degenerate series: zero variance"):
        super().__init__(msg)


class UnsimulableProposal(MisreportError):
    """Raised by the synthetic likelihood; the sampler maps it to -inf."""

    code = "UNSIMULABLE"

    def __init__(self, msg="proposal unsimulable"):
        super().__init__(msg)


class DegenerateCovariance(UnsimulableProposal):
    code = "DEGENERATE_COV"

    def __init__(self, msg="degenerate covariance"):
        super().__init__(msg)


class InitializationError(MisreportError, RuntimeError):
    code = "INIT"

    def __init__(self, msg="cannot initialize chain"):
        super().__init__(msg)


class ParameterError(MisreportError, ValueError):
    code = "PARAM"


class SchemaError(MisreportError, ValueError):
    code = "SCHEMA"


class SeriesValidationError(MisreportError, ValueError):
    code = "VALIDATION"


class ConfigError(MisreportError, ValueError):
    code = "CONFIG"
