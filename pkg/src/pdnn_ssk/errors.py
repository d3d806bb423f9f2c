"""Shared exception types."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or produced non-finite values.

    Carries enough context (module, operation, diagnostics) for the CLI to
    emit a machine-readable error record and exit with status 3.
    """

    def __init__(self, module: str, op: str, message: str):
        super().__init__(f"{module}.{op}: {message}")
        self.module = module
        self.op = op
        self.detail = message
