"""Error type shared by every module.

Each failure carries a stable machine-readable ``code`` (for example
``NOT_SUBLATTICE`` or ``CAP_EXCEEDED``) so the CLI can map it to an exit
status and tests can match on it without parsing messages.
"""

from __future__ import annotations


class MetacoeffError(Exception):
    def __init__(self, code: str, message: str = "") -> None:
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message


class CapExceeded(MetacoeffError):
    def __init__(self, message: str = "") -> None:
        super().__init__("CAP_EXCEEDED", message)
