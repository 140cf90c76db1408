# errors.py
"""Exception hierarchy shared by the benchmark, swarm, campaign and explainer modules."""


class SwarmxError(Exception):
    """Base class for every error raised on purpose by this package."""


class ConfigurationError(SwarmxError, ValueError):
    """A setting or identifier outside the supported domain (unknown fid, k >= n, ...)."""


class ArgumentError(SwarmxError, ValueError):
    """A call argument with the wrong shape or a non-finite value."""


class DataIntegrityError(SwarmxError):
    """Records or traces that contradict their own invariants (gaps, values below the optimum)."""


class IncompleteGridError(DataIntegrityError):
    """Run records that do not cover every expected (config, fid, iid, run) coordinate."""


class PreconditionError(SwarmxError):
    """An input that is well formed but not what the operation requires."""


class RunFailedError(SwarmxError):
    """A single PSO run failed inside a campaign; carries the failing coordinate."""

    def __init__(self, coordinate: dict, cause: BaseException):
        self.coordinate = dict(coordinate)
        self.cause = cause
        where = ", ".join(f"{k}={v}" for k, v in self.coordinate.items())
        super().__init__(f"run failed at ({where}): {cause!r}")

    def __reduce__(self):
        # raised inside worker processes, so it must survive pickling
        return (self.__class__, (self.coordinate, self.cause))
