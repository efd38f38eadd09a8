class CoexistError(Exception):
    """Base class for coexistApp failures."""


class ConvergenceError(CoexistError):
    """A series, quadrature or root bracket failed to converge."""


class WindowTooSmallError(CoexistError):
    """The Voronoi oracle window clipped the cell of the origin nucleus."""


class OutsideSupportError(CoexistError, ValueError):
    """Requested value lies outside the support of a distribution."""


class DegenerateHistogramError(CoexistError, ValueError):
    pass


class RegimeWarning(UserWarning):
    """Approximation used outside r_exc >> max(h_bs, h_rad)."""


class ConfigError(CoexistError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
