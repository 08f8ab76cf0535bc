from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from kaa.exceptions import ConfigError
from kaa.models.base_model import Model
from kaa.models.ensemble import EnsembleSnapshot, ParticleEnsemble
from kaa.models.params import Params
from kaa.utils.response_helpers import require_keys

SAMPLER_TYPES = ('gaussian', 'shell', 'point')
REQUIRED_CONFIG_KEYS = ('params', 'n', 'eps', 'dt', 't_end', 'seed', 'sampler', 'diag_every')


@dataclass(repr=False)
class ChargeState(Model):
    """Point charge position/velocity plus the running V_inf estimate"""

    X: np.ndarray
    V: np.ndarray
    Vinf_est: np.ndarray = None
    W: np.ndarray = None

    array_fields = ('X', 'V', 'Vinf_est', 'W')

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).copy()
        self.V = np.asarray(self.V, dtype=float).copy()
        self.Vinf_est = self.V.copy() if self.Vinf_est is None else np.asarray(self.Vinf_est, dtype=float)
        self.W = self.V - self.Vinf_est

    def set_vinf_estimate(self, vinf):
        self.Vinf_est = np.asarray(vinf, dtype=float).copy()
        self.W = self.V - self.Vinf_est

    def copy(self) -> 'ChargeState':
        return ChargeState(self.X.copy(), self.V.copy(), self.Vinf_est.copy())


@dataclass(repr=False)
class SamplerSpec(Model):
    type: str
    center_x: np.ndarray
    center_v: np.ndarray
    widths: np.ndarray
    amplitude: float = 0.05
    mirror: bool = False

    array_fields = ('center_x', 'center_v', 'widths')

    def __post_init__(self):
        if self.type not in SAMPLER_TYPES:
            raise ConfigError(f"Unknown sampler type: {self.type}", allowed=list(SAMPLER_TYPES))
        self.center_x = np.asarray(self.center_x, dtype=float)
        self.center_v = np.asarray(self.center_v, dtype=float)
        self.widths = np.atleast_1d(np.asarray(self.widths, dtype=float))
        if self.widths.size == 1:
            self.widths = np.repeat(self.widths, 2)
        if self.center_x.shape != (3,) or self.center_v.shape != (3,):
            raise ConfigError("sampler center_x and center_v must be 3-vectors")
        if np.any(self.widths < 0):
            raise ConfigError("sampler widths must be non-negative")
        self.amplitude = float(self.amplitude)


@dataclass(repr=False)
class SimConfig(Model):
    params: Params
    n: int
    eps: float
    dt: float
    t_end: float
    seed: int
    sampler: SamplerSpec
    diag_every: int
    charge_x0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    charge_v0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r_min_floor: float = 1e-3
    bulk_speed: float = 0.1
    bulk_spread: float = 1e-3
    profile_window: float = 0.5
    grid_count: int = 64

    array_fields = ('charge_x0', 'charge_v0')

    def __post_init__(self):
        self.n = int(self.n)
        self.dt = float(self.dt)
        self.eps = float(self.eps)
        self.t_end = float(self.t_end)
        self.diag_every = int(self.diag_every)
        if self.n < 1:
            raise ConfigError("n must be at least 1", n=self.n)
        if not self.dt > 0:
            raise ConfigError("dt must be positive", dt=self.dt)
        if self.eps < 0 or self.t_end < 0:
            raise ConfigError("eps and t_end must be non-negative")
        if self.diag_every < 1:
            raise ConfigError("diag_every must be at least 1")
        if not 0.0 < self.profile_window <= 1.0:
            raise ConfigError("profile_window must lie in (0, 1]")
        if self.sampler.mirror and self.n % 8:
            raise ConfigError("mirror sampling needs n to be a multiple of 8", n=self.n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @classmethod
    def from_dict(cls, dikt) -> 'SimConfig':
        require_keys(dikt, REQUIRED_CONFIG_KEYS, where='config')
        require_keys(dikt['params'], ('q', 'Q', 'Qc', 'mg', 'Mc'), where='params')
        sampler = require_keys(dikt['sampler'], ('type', 'center_x', 'center_v', 'widths', 'amplitude'),
                               where='sampler')
        charge = dikt.get('charge', {}) or {}
        bulk = dikt.get('bulk', {}) or {}
        try:
            return cls(
                params=Params(**{k: dikt['params'][k] for k in ('q', 'Q', 'Qc', 'mg', 'Mc')}),
                n=dikt['n'],
                eps=dikt['eps'],
                dt=dikt['dt'],
                t_end=dikt['t_end'],
                seed=int(dikt['seed']),
                sampler=SamplerSpec(**{k: sampler[k] for k in sampler
                                       if k in ('type', 'center_x', 'center_v', 'widths', 'amplitude', 'mirror')}),
                diag_every=dikt['diag_every'],
                charge_x0=np.asarray(charge.get('X0', [0.0, 0.0, 0.0]), dtype=float),
                charge_v0=np.asarray(charge.get('V0', [0.0, 0.0, 0.0]), dtype=float),
                r_min_floor=float(dikt.get('r_min_floor', 1e-3)),
                bulk_speed=float(bulk.get('speed', 0.1)),
                bulk_spread=float(bulk.get('spread', 1e-3)),
                profile_window=float(dikt.get('profile_window', 0.5)),
                grid_count=int(dikt.get('grid_count', 64)),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid config value: {e}")


@dataclass(repr=False)
class DiagnosticsRecord(Model):
    t: float
    supE: float
    supE_proxy: float
    moments: Dict[str, float]
    X: np.ndarray
    V: np.ndarray
    W: np.ndarray
    energy: float
    momentum: np.ndarray
    drift_median: float
    drift_max: float

    array_fields = ('X', 'V', 'W', 'momentum')

    MOMENT_KEYS = ('a_sup', 'a_l2', 'xi_sup', 'xi_l2', 'lambda_sup', 'lambda_l2', 'eta_sup', 'eta_l2')

    def row(self) -> List[float]:
        return ([self.t, self.supE, self.supE_proxy]
                + [self.moments[k] for k in self.MOMENT_KEYS]
                + list(self.X) + list(self.V) + list(self.W)
                + [self.energy] + list(self.momentum)
                + [self.drift_median, self.drift_max])

    @classmethod
    def from_row(cls, row) -> 'DiagnosticsRecord':
        row = [float(value) for value in row]
        k = len(cls.MOMENT_KEYS)
        moments = dict(zip(cls.MOMENT_KEYS, row[3:3 + k]))
        rest = row[3 + k:]
        return cls(t=row[0], supE=row[1], supE_proxy=row[2], moments=moments,
                   X=np.array(rest[0:3]), V=np.array(rest[3:6]), W=np.array(rest[6:9]),
                   energy=rest[9], momentum=np.array(rest[10:13]),
                   drift_median=rest[13], drift_max=rest[14])

    @classmethod
    def columns(cls) -> List[str]:
        return (['t', 'supE', 'supE_proxy'] + list(cls.MOMENT_KEYS)
                + ['Xc_x', 'Xc_y', 'Xc_z', 'Vc_x', 'Vc_y', 'Vc_z', 'W_x', 'W_y', 'W_z']
                + ['energy', 'P_x', 'P_y', 'P_z', 'drift_median', 'drift_max'])


@dataclass(repr=False)
class ChargeFit(Model):
    Vinf: np.ndarray
    coef: np.ndarray
    rel_residual: float
    Xinf: np.ndarray
    log_coef: np.ndarray
    n_records: int
    t_start: float
    t_end: float
    expected_coef: Optional[np.ndarray] = None
    rel_diff: Optional[float] = None

    array_fields = ('Vinf', 'coef', 'Xinf', 'log_coef', 'expected_coef')


@dataclass(repr=False)
class DriftReport(Model):
    n_bulk: int
    fraction_improved: float
    sup_corrected: float
    sup_uncorrected: float
    median_ratio: float
    t_start: float
    t_end: float


@dataclass
class SimulationResult:
    """Everything a run produces; partial when attached to a SimulationError"""

    ensemble: ParticleEnsemble
    charge: ChargeState
    records: List[DiagnosticsRecord]
    snapshots: List[EnsembleSnapshot]
    energy0: float
    momentum0: np.ndarray
    steps_done: int
    wall_seconds: float = 0.0
    completed: bool = True
    theta0: Optional[np.ndarray] = None
    v_scale: float = 1.0
    scale0: float = 1.0
