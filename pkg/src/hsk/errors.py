"""Exception hierarchy shared by every module in the package."""


class HSKError(Exception):
    """Base class for all package errors."""


class UnknownNodeError(HSKError, KeyError):
    def __init__(self, node_id):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self):
        return f"unknown node id {self.node_id}"


class TopologyError(HSKError, ValueError):
    """Invalid node set or event (duplicate ids, coverage assumption broken, ...)."""


class DisconnectedError(HSKError):
    """Raised when an operation needs a connected graph and did not get one."""

    def __init__(self, components):
        self.components = tuple(tuple(c) for c in components)
        super().__init__(
            f"graph is disconnected into {len(self.components)} components: "
            + ", ".join(str(list(c)) for c in self.components)
        )


class ConfigurationError(HSKError, ValueError):
    pass


class PreconditionError(HSKError, ValueError):
    pass


class LinkError(HSKError):
    """Pairwise key establishment failed."""


class DecryptionError(HSKError):
    """Ciphertext did not authenticate under the supplied key."""


class KeyDistributionError(HSKError):
    def __init__(self, edge, message=None):
        self.edge = edge
        super().__init__(message or f"no secure link key for edge {edge}")
