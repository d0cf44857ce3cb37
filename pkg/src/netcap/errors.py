"""Exception types raised by the netcap package."""

from __future__ import annotations


class NetcapError(Exception):
    """Base class for all netcap errors."""


class InvalidInstanceError(NetcapError):
    """A network, traffic matrix, facility menu or instance is malformed."""


class ParseError(NetcapError):
    """An instance file, point file or LP text could not be parsed."""


class PreconditionError(NetcapError):
    """An operation's input fails a documented precondition."""


class InvalidCutError(NetcapError):
    """A cut-set specification is structurally invalid."""


class VacuousCutError(NetcapError):
    """The requested cut-set inequality is vacuous (zero MIR remainder).

    Distinct from :class:`InvalidCutError`: the request was well formed but
    the resulting inequality would be trivial, so none is produced.
    """

    def __init__(self, message: str, data=None):
        super().__init__(message)
        self.data = data


class NoRoutingError(NetcapError):
    """No capacity level can route the given traffic (disconnected network)."""


class BoxTooLargeError(NetcapError):
    """An enumeration box exceeds the configured size limit."""


class MissingBoundError(NetcapError):
    """An integer variable has no upper bound, so search cannot terminate."""
