"""
Potential, electric field and field gradient of a weighted particle ensemble.

Direct O(n^2) softened sums, parallel over targets with numba. Scale-localized
fields use a C^2 bump phi(s) = C (1 - log2(s)^2)^3 on [1/2, 2], normalized so
that the integral of phi(|x|)/|x|^2 over space is 1.
"""

import math
from functools import lru_cache

import numpy as np
from numba import njit, prange
from scipy.integrate import quad, trapezoid

from kaa.config import configure_threads
from kaa.exceptions import DomainError, WindowTooShortError
from kaa.models.ensemble import AsymptoticProfile, FieldSample, ParticleEnsemble
from kaa.utils.logger import get_logger

logger = get_logger('kaa.field')

_INV_FOUR_PI = 1.0 / (4.0 * np.pi)
_LN2 = math.log(2.0)
MIN_PROFILE_SNAPSHOTS = 8
SCALES_PER_DECADE = 128


# ---------------------------------------------------------------------------
# kernels

@njit(parallel=True)
def _direct_sum(targets, sources, w, eps2, skip_self, hessian):
    m = targets.shape[0]
    n = sources.shape[0]
    psi = np.zeros(m)
    E = np.zeros((m, 3))
    F = np.zeros((m, 3, 3))
    for i in prange(m):
        p = 0.0
        e0 = 0.0
        e1 = 0.0
        e2 = 0.0
        f00 = 0.0
        f01 = 0.0
        f02 = 0.0
        f11 = 0.0
        f12 = 0.0
        f22 = 0.0
        for j in range(n):
            if skip_self and i == j:
                continue
            z0 = targets[i, 0] - sources[j, 0]
            z1 = targets[i, 1] - sources[j, 1]
            z2 = targets[i, 2] - sources[j, 2]
            r2 = z0 * z0 + z1 * z1 + z2 * z2
            if r2 == 0.0:
                continue
            inv = 1.0 / math.sqrt(r2 + eps2)
            inv3 = inv * inv * inv
            p -= w[j] * inv
            c = w[j] * inv3
            e0 += c * z0
            e1 += c * z1
            e2 += c * z2
            if hessian:
                d = 3.0 * c * inv * inv
                f00 += c - d * z0 * z0
                f11 += c - d * z1 * z1
                f22 += c - d * z2 * z2
                f01 -= d * z0 * z1
                f02 -= d * z0 * z2
                f12 -= d * z1 * z2
        psi[i] = p
        E[i, 0] = e0
        E[i, 1] = e1
        E[i, 2] = e2
        if hessian:
            F[i, 0, 0] = f00
            F[i, 1, 1] = f11
            F[i, 2, 2] = f22
            F[i, 0, 1] = f01
            F[i, 1, 0] = f01
            F[i, 0, 2] = f02
            F[i, 2, 0] = f02
            F[i, 1, 2] = f12
            F[i, 2, 1] = f12
    return psi, E, F


@njit
def _bump_derivative(s, norm):
    # d/ds of norm * (1 - l^2)^3 with l = log2(s)
    if s <= 0.5 or s >= 2.0:
        return 0.0
    ell = math.log(s) / _LN2
    one = 1.0 - ell * ell
    return norm * 3.0 * one * one * (-2.0 * ell) / (s * _LN2)


@njit(parallel=True)
def _scale_sum(targets, sources, w, eps2, scales, norm):
    m = targets.shape[0]
    n = sources.shape[0]
    k = scales.shape[0]
    E = np.zeros((m, k, 3))
    for i in prange(m):
        for j in range(n):
            z0 = targets[i, 0] - sources[j, 0]
            z1 = targets[i, 1] - sources[j, 1]
            z2 = targets[i, 2] - sources[j, 2]
            r2 = z0 * z0 + z1 * z1 + z2 * z2
            if r2 == 0.0:
                continue
            s = math.sqrt(r2 + eps2)
            for l in range(k):
                R = scales[l]
                dphi = _bump_derivative(s / R, norm)
                if dphi == 0.0:
                    continue
                c = -w[j] * dphi / (R * R * s)
                E[i, l, 0] += c * z0
                E[i, l, 1] += c * z1
                E[i, l, 2] += c * z2
    return E


@lru_cache(maxsize=1)
def bump_norm() -> float:
    """C such that 4 pi * integral of C (1 - log2(s)^2)^3 ds over [1/2, 2] equals 1"""
    integral, _ = quad(lambda s: (1.0 - (math.log(s) / _LN2) ** 2) ** 3, 0.5, 2.0)
    return 1.0 / (4.0 * np.pi * integral)


def bump(s):
    s = np.asarray(s, dtype=float)
    ell = np.log2(np.where(s > 0, s, 1.0))
    return np.where((s > 0.5) & (s < 2.0), bump_norm() * (1.0 - ell * ell) ** 3, 0.0)


# ---------------------------------------------------------------------------

def _targets(y):
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    return np.ascontiguousarray(np.atleast_2d(y)), single


def direct_sum(targets, sources, w, eps=0.0, skip_self=False, hessian=False):
    """(psi, E, F) at targets, already scaled by 1/(4 pi)"""
    targets = np.ascontiguousarray(targets, dtype=float)
    sources = np.ascontiguousarray(sources, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if skip_self and targets.shape[0] != sources.shape[0]:
        raise DomainError("skip_self needs one target per source")
    configure_threads()
    psi, E, F = _direct_sum(targets, sources, w, float(eps) ** 2, bool(skip_self), bool(hessian))
    return psi * _INV_FOUR_PI, E * _INV_FOUR_PI, F * _INV_FOUR_PI


def _pick(values, single):
    return values[0] if single else values


def in_close_region(X, t):
    """|X| <= 10 <t>"""
    return np.linalg.norm(np.asarray(X, dtype=float), axis=-1) <= 10.0 * np.sqrt(1.0 + t * t)


def in_far_region(X, t):
    """|X| >= <t>"""
    return np.linalg.norm(np.asarray(X, dtype=float), axis=-1) >= np.sqrt(1.0 + t * t)


class FieldService:
    """Field evaluation from a read-only ensemble snapshot"""

    @staticmethod
    def potential(y, ens: ParticleEnsemble, eps: float = 0.0):
        targets, single = _targets(y)
        psi, _, _ = direct_sum(targets, ens.x, ens.w, eps)
        return _pick(psi, single)

    @staticmethod
    def efield(y, ens: ParticleEnsemble, eps: float = 0.0):
        targets, single = _targets(y)
        _, E, _ = direct_sum(targets, ens.x, ens.w, eps)
        return _pick(E, single)

    @staticmethod
    def fgrad(y, ens: ParticleEnsemble, eps: float = 0.0):
        targets, single = _targets(y)
        _, _, F = direct_sum(targets, ens.x, ens.w, eps, hessian=True)
        return _pick(F, single)

    @staticmethod
    def field_sample(y, ens: ParticleEnsemble, eps: float = 0.0) -> FieldSample:
        targets, single = _targets(y)
        psi, E, F = direct_sum(targets, ens.x, ens.w, eps, hessian=True)
        return FieldSample(y=_pick(targets, single), psi=_pick(psi, single),
                           E=_pick(E, single), F=_pick(F, single))

    @staticmethod
    def efield_scale(y, ens: ParticleEnsemble, R, eps: float = 0.0):
        """Scale-R piece E_R; R may be a scalar or a 1-d grid (extra axis before the components)"""
        targets, single = _targets(y)
        scales = np.atleast_1d(np.asarray(R, dtype=float))
        if np.any(scales <= 0):
            raise DomainError("Scale R must be positive")
        configure_threads()
        E = _scale_sum(targets, np.ascontiguousarray(ens.x), np.ascontiguousarray(ens.w),
                       float(eps) ** 2, np.ascontiguousarray(scales), bump_norm())
        if np.ndim(R) == 0:
            E = E[:, 0, :]
        return _pick(E, single)

    @staticmethod
    def efield_resummed(y, ens: ParticleEnsemble, eps: float = 0.0,
                        scales_per_decade: int = SCALES_PER_DECADE):
        """Trapezoid rule in ln R over the scale pieces"""
        targets, single = _targets(y)
        dist = np.sqrt(((targets[:, None, :] - ens.x[None, :, :]) ** 2).sum(-1))
        dist = np.sqrt(dist[dist > 0] ** 2 + eps * eps)
        if dist.size == 0:
            return _pick(np.zeros_like(targets), single)
        lo, hi = np.log10(dist.min() / 2.0), np.log10(dist.max() * 2.0)
        count = max(int(np.ceil((hi - lo) * scales_per_decade)) + 1, 3)
        log_r = np.linspace(lo, hi, count) * np.log(10.0)
        E_R = FieldService.efield_scale(targets, ens, np.exp(log_r), eps)
        return _pick(trapezoid(E_R, x=log_r, axis=1), single)

    @staticmethod
    def effective_field(y, ens: ParticleEnsemble, eps: float = 0.0, t: float = None):
        """Field of the free-streaming positions t a_i"""
        t = ens.t if t is None else t
        targets, single = _targets(y)
        _, E, _ = direct_sum(targets, t * ens.a, ens.w, eps)
        return _pick(E, single)

    @staticmethod
    def effective_potential(y, ens: ParticleEnsemble, eps: float = 0.0, t: float = None):
        t = ens.t if t is None else t
        targets, single = _targets(y)
        psi, _, _ = direct_sum(targets, t * ens.a, ens.w, eps)
        return _pick(psi, single)

    @staticmethod
    def asymptotic_profile(snapshots, a_grid, window=None, eps: float = 0.0,
                           skip_self: bool = False) -> AsymptoticProfile:
        """Time average of t^2 E_eff(t a) over the snapshots inside window=(t_start, t_end).

        skip_self pairs grid row i with particle i (a_grid = actions of the ensemble).
        """
        a_grid = np.atleast_2d(np.asarray(a_grid, dtype=float))
        if window is not None:
            t_start, t_end = window
            snapshots = [s for s in snapshots if t_start <= s.t <= t_end]
        snapshots = [s for s in snapshots if s.t > 0]
        if len(snapshots) < MIN_PROFILE_SNAPSHOTS:
            raise WindowTooShortError(
                f"Asymptotic profile needs at least {MIN_PROFILE_SNAPSHOTS} snapshots, got {len(snapshots)}",
                n_snapshots=len(snapshots))

        E_inf = np.zeros_like(a_grid)
        E0_inf = np.zeros(3)
        for snap in snapshots:
            t = snap.t
            sources = t * snap.a
            _, E, _ = direct_sum(t * a_grid, sources, snap.w, eps, skip_self=skip_self)
            _, E0, _ = direct_sum(np.zeros((1, 3)), sources, snap.w, eps)
            E_inf += t * t * E
            E0_inf += t * t * E0[0]
        E_inf /= len(snapshots)
        E0_inf /= len(snapshots)
        logger.debug(f"asymptotic profile over {len(snapshots)} snapshots, "
                     f"t in [{snapshots[0].t:g}, {snapshots[-1].t:g}]")
        return AsymptoticProfile(a_grid=a_grid, E_inf=E_inf, E0_inf=E0_inf,
                                 t_start=snapshots[0].t, t_end=snapshots[-1].t,
                                 n_snapshots=len(snapshots))
