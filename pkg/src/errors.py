class LaplacianError(ValueError):
    """Base class for invalid inputs to the solver."""


class EdgeListError(LaplacianError):
    pass


class ZeroDiagonalError(LaplacianError):
    def __init__(self, node: int):
        self.node = int(node)
        super().__init__(f"Zero diagonal at node {self.node} (disconnected node cannot be relaxed)")


class MatrixMarketError(LaplacianError):
    pass


class GridSpecError(LaplacianError):
    pass


class IncompatibleRhsError(LaplacianError):
    def __init__(self, component: int, residual_sum: float):
        self.component = int(component)
        self.residual_sum = float(residual_sum)
        super().__init__(
            f"Right-hand side is incompatible: sum over component {self.component} is {self.residual_sum:.3e}"
        )


class SingularCoarsestError(LaplacianError):
    pass


class ConfigError(LaplacianError):
    pass
