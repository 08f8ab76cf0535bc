from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from kaa.models.base_model import Model


@dataclass(repr=False)
class BracketReport(Model):
    """Residuals of a table of bracket relations at one phase point"""

    label: str
    residuals: Dict[str, float]
    tolerance: float
    skipped: List[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def worst(self) -> Optional[str]:
        if not self.residuals:
            return None
        return max(self.residuals, key=self.residuals.get)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance

    def to_dict(self):
        result = super().to_dict()
        result.update(max_residual=self.max_residual, worst=self.worst, passed=self.passed)
        return result


@dataclass(repr=False)
class SuiteReport(Model):
    suite: str
    seed: int
    n: int
    max_residual: float = 0.0
    argmax_sample: Optional[Any] = None
    fitted_constants: Dict[str, float] = field(default_factory=dict)
    tolerance: float = 0.0
    passed: bool = True
    checks: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def add_check(self, name, residual, tolerance, sample=None):
        """Record one asserted property; the report fails if any check fails"""
        residual = float(residual)
        ok = bool(residual < tolerance)
        self.checks[name] = {'max_residual': residual, 'tolerance': tolerance, 'pass': ok}
        if residual / tolerance >= (self.max_residual / self.tolerance if self.tolerance else 0.0):
            self.max_residual = residual
            self.tolerance = tolerance
            self.argmax_sample = sample
        self.passed = self.passed and ok
        return ok

    def to_dict(self):
        return {
            'suite': self.suite,
            'seed': self.seed,
            'n': self.n,
            'max_residual': self.max_residual,
            'argmax_sample': self.argmax_sample,
            'fitted_constants': self.fitted_constants,
            'tolerance': self.tolerance,
            'checks': self.checks,
            'pass': self.passed,
        }
