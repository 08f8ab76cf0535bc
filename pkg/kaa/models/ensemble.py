from dataclasses import dataclass

import numpy as np

from kaa.models.base_model import Model


@dataclass(repr=False)
class ParticleEnsemble(Model):
    """Weighted Lagrangian particles in the charge frame.

    theta holds angles pulled back by the free flow (theta_t - t a), so it is
    frozen when the mean field vanishes. x, v cache the relative physical
    states at time t.
    """

    theta: np.ndarray
    a: np.ndarray
    w: np.ndarray
    gamma: np.ndarray
    x: np.ndarray
    v: np.ndarray
    t: float = 0.0

    array_fields = ('theta', 'a', 'w', 'gamma', 'x', 'v')

    def __post_init__(self):
        for name in self.array_fields:
            setattr(self, name, np.ascontiguousarray(getattr(self, name), dtype=float))
        self.t = float(self.t)

    @property
    def n(self) -> int:
        return int(self.w.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.w.sum())

    def copy(self) -> 'ParticleEnsemble':
        return ParticleEnsemble(self.theta.copy(), self.a.copy(), self.w.copy(),
                                self.gamma.copy(), self.x.copy(), self.v.copy(), self.t)

    def snapshot(self) -> 'EnsembleSnapshot':
        return EnsembleSnapshot(t=self.t, theta=self.theta.copy(), a=self.a.copy(), w=self.w.copy())

    @classmethod
    def from_actions(cls, theta, a, w, t=0.0, gamma=None):
        """Ensemble known only through (theta, a); physical cache left empty"""
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        a = np.atleast_2d(np.asarray(a, dtype=float))
        w = np.atleast_1d(np.asarray(w, dtype=float))
        gamma = np.sqrt(w) if gamma is None else gamma
        return cls(theta, a, w, gamma, theta + t * a, a.copy(), t)


@dataclass(repr=False)
class EnsembleSnapshot(Model):
    """Actions and pulled-back angles at one diagnostic time"""

    t: float
    theta: np.ndarray
    a: np.ndarray
    w: np.ndarray

    array_fields = ('theta', 'a', 'w')


@dataclass(repr=False)
class FieldSample(Model):
    y: np.ndarray
    psi: np.ndarray
    E: np.ndarray
    F: np.ndarray

    array_fields = ('y', 'psi', 'E', 'F')


@dataclass(repr=False)
class AsymptoticProfile(Model):
    """Time-averaged t^2 E_eff(t a) over a window of snapshots"""

    a_grid: np.ndarray
    E_inf: np.ndarray
    E0_inf: np.ndarray
    t_start: float
    t_end: float
    n_snapshots: int

    array_fields = ('a_grid', 'E_inf', 'E0_inf')
