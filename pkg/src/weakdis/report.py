"""Inequality-check records."""

from dataclasses import dataclass, field

# Relative slack used by every pass/fail decision: an inequality "lhs <= rhs"
# passes iff rhs - lhs >= -PASS_SLACK * max(1, |rhs|).
PASS_SLACK = 1e-12


@dataclass(frozen=True)
class BoundReport:
    """Outcome of a single inequality verification.

    Parameters
    ----------
    name : str
        Identifier of the inequality being checked.
    lhs, rhs : float
        The two sides of ``lhs <= rhs``.
    context : dict
        Parameter values, worst points, and any measured diagnostics.
    notes : str
        Free-form remarks (e.g. whether a constant is a labeled surrogate).
    """

    name: str
    lhs: float
    rhs: float
    context: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -PASS_SLACK * max(1.0, abs(self.rhs))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "passed": self.passed,
            "context": dict(self.context),
            "notes": self.notes,
        }
