"""Exception types raised by the pricing solver.

Empty regimes are reported as values (``regimes.EmptyRegime``), not raised.
"""


class PricingError(ValueError):
    pass


class DomainError(PricingError):
    """A closed form was evaluated outside the set where it is defined."""


class NotInvertible(PricingError):
    """psi is constant when eps = 0 and has no inverse."""


class EmptySection(PricingError):
    def __init__(self, p, lower, upper):
        super().__init__(f"p-section at p={p!r} is empty: upper {upper!r} < lower {lower!r}")
        self.p = p
        self.lower = lower
        self.upper = upper


class SingularHessian(PricingError):
    def __init__(self, determinant):
        super().__init__(f"objective hessian is singular (4*w1*w3 - w2^2 = {determinant!r})")
        self.determinant = determinant


class AssumptionViolated(PricingError):
    def __init__(self, report):
        failing = ", ".join(f"{name} slack={slack!r}" for name, slack in report.failures())
        super().__init__(f"market assumptions violated: {failing}")
        self.report = report


class InternalInconsistency(PricingError):
    def __init__(self, regime, slack):
        super().__init__(f"{regime} solution leaves its region (slack {slack!r})")
        self.regime = regime
        self.slack = slack


class ScenarioError(PricingError):
    """A scenario file could not be parsed or validated."""

    def __init__(self, message, offset=None, key=None):
        parts = [message]
        if offset is not None:
            parts.append(f"at byte offset {offset}")
        if key is not None:
            parts.append(f"key '{key}'")
        super().__init__(", ".join(parts))
        self.offset = offset
        self.key = key
