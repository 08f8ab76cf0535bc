from dataclasses import dataclass

import numpy as np

from kaa.models.base_model import Model

# fold tags: +1 outgoing side, -1 incoming side, 0 on the fold
ON_FOLD = 0


def _vec(value):
    return np.asarray(value, dtype=float)


@dataclass(repr=False)
class PhaseState(Model):
    """Point (x, v) in physical phase space; arrays may carry a batch axis"""

    x: np.ndarray
    v: np.ndarray

    array_fields = ('x', 'v')

    def __post_init__(self):
        self.x = _vec(self.x)
        self.v = _vec(self.v)


@dataclass(repr=False)
class ConservedSet(Model):
    H: np.ndarray
    Lvec: np.ndarray
    R: np.ndarray

    array_fields = ('H', 'Lvec', 'R')


@dataclass(repr=False)
class ActionAngle(Model):
    theta: np.ndarray
    a: np.ndarray
    branch: np.ndarray = None

    array_fields = ('theta', 'a')

    def __post_init__(self):
        self.theta = _vec(self.theta)
        self.a = _vec(self.a)
        if self.branch is not None:
            self.branch = np.asarray(self.branch, dtype=int)


@dataclass(repr=False)
class SICCoords(Model):
    """Super-integrable coordinates (xi, eta, L, u); xi < 0 marks past coordinates"""

    xi: np.ndarray
    eta: np.ndarray
    Lvec: np.ndarray
    u: np.ndarray

    array_fields = ('xi', 'eta', 'Lvec', 'u')

    def __post_init__(self):
        self.xi = _vec(self.xi)
        self.eta = _vec(self.eta)
        self.Lvec = _vec(self.Lvec)
        self.u = _vec(self.u)

    @property
    def lam(self):
        return np.linalg.norm(self.Lvec, axis=-1)

    @property
    def kappa(self):
        return self.lam / np.abs(self.xi)

    def to_dict(self):
        result = super().to_dict()
        result['lambda'] = np.asarray(self.lam).tolist()
        result['kappa'] = np.asarray(self.kappa).tolist()
        return result


@dataclass(repr=False)
class RhoSigma(Model):
    rho: np.ndarray
    sigma: np.ndarray
    branch: np.ndarray

    array_fields = ('rho', 'sigma')
