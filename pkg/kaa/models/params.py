import math
from dataclasses import dataclass

from kaa.exceptions import ConfigError
from kaa.models.base_model import Model


@dataclass(repr=False)
class Params(Model):
    """Physical constants of the gas / point-charge system"""

    q: float = 1.0    # charge coupling, repulsive
    Q: float = 1.0    # gas self-coupling
    Qc: float = 1.0   # charge-gas coupling
    mg: float = 1.0   # gas particle mass
    Mc: float = 1.0   # point charge mass

    def __post_init__(self):
        for name in ('q', 'Q', 'Qc', 'mg', 'Mc'):
            setattr(self, name, float(getattr(self, name)))
        if not self.q > 0:
            raise ConfigError("q must be positive (repulsive case only)", q=self.q)
        if self.Q < 0 or self.Qc < 0:
            raise ConfigError("Q and Qc must be non-negative", Q=self.Q, Qc=self.Qc)
        if not (self.mg > 0 and self.Mc > 0):
            raise ConfigError("mg and Mc must be positive", mg=self.mg, Mc=self.Mc)

    @property
    def reciprocal(self) -> bool:
        """True when q = Mc Qc / (2 pi mg), the pairing that conserves momentum"""
        return math.isclose(self.q * 2.0 * math.pi * self.mg, self.Mc * self.Qc, rel_tol=1e-12)

    @property
    def field_free(self) -> bool:
        return self.Q == 0.0 and self.Qc == 0.0
