"""Exception types shared across the simulator."""


class CellfreeError(Exception):
    """Base class for all simulator errors."""


class SingularChannel(CellfreeError):
    """ZF Gram matrix is numerically singular; the realization should be redrawn."""


class SingularSystem(CellfreeError):
    """Regularized precoder system is numerically singular (pathological loading)."""


class IllConditioned(CellfreeError):
    """Dense solve refused: condition estimate above threshold."""

    def __init__(self, cond_estimate):
        super().__init__(f"condition estimate {cond_estimate:.3e} above threshold")
        self.cond_estimate = cond_estimate


class ZeroPrecoder(CellfreeError):
    """Inner precoder has zero Frobenius norm; normalization undefined."""


class ZeroPowerEntry(CellfreeError):
    """A power coefficient is zero where a positive entry is required."""


class ZeroChannel(CellfreeError):
    """Channel estimate has zero norm; SNR calibration undefined."""


class DegeneratePrecoder(CellfreeError):
    """All per-AP power coefficients are zero; UPA undefined."""


class SolverFailure(CellfreeError):
    """Feasibility solver broke down numerically (distinct from infeasible)."""


class OddBitCount(CellfreeError):
    """QPSK modulation needs an even number of bits."""


class RealizationError(CellfreeError):
    """A channel realization failed inside the pipeline; redraw and count."""


class RedrawBudgetExceeded(CellfreeError):
    """More than the tolerated fraction of realizations had to be redrawn."""


class ParseError(CellfreeError):
    """Scenario file is malformed."""


class ValidationError(CellfreeError):
    """Scenario value out of range or inconsistent."""
