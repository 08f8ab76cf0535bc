"""
Exact transforms of the repulsive Kepler problem  x'' = (q/2) x / |x|^3.

Physical (x, v), asymptotic angle-action (theta, a) and super-integrable
(xi, eta, L, u) coordinates, the implicit sigma/rho solve and the exact flow.

Array functions operate on the last axis (length 3) and broadcast over any
leading batch axes; KeplerService wraps them for the model types.
"""

import numpy as np

from kaa.config import settings
from kaa.exceptions import BranchError, DomainError
from kaa.models.params import Params
from kaa.models.phase import (ON_FOLD, ActionAngle, ConservedSet, PhaseState,
                              RhoSigma, SICCoords)
from kaa.utils.logger import get_logger

logger = get_logger('kaa.kepler')

_EPS = np.finfo(float).eps
_NEWTON_MAX_ITER = 200
_SERIES_W = 1e-2


def _dot(a, b):
    return np.einsum('...i,...i->...', a, b)


def _norm(a):
    return np.sqrt(_dot(a, a))


def _col(s):
    return np.asarray(s)[..., None]


# ---------------------------------------------------------------------------
# special functions

def K(s):
    """K(s) = sqrt(s(s-1)) - ln(sqrt(s) + sqrt(s-1)), s >= 1"""
    s = np.asarray(s, dtype=float)
    w = np.sqrt(np.maximum(s - 1.0, 0.0))
    w2 = w * w
    series = w * w2 * (2.0 / 3.0 - w2 / 5.0 + 3.0 * w2 * w2 / 28.0)
    direct = w * np.sqrt(s) - np.arcsinh(w)
    return np.where(w < _SERIES_W, series, direct)


def dK(s):
    """K'(s) = sqrt(1 - 1/s)"""
    s = np.asarray(s, dtype=float)
    return np.sqrt(np.maximum(s - 1.0, 0.0) / s)


def G(y):
    y = np.asarray(y, dtype=float)
    w = np.sqrt(np.maximum(y - 1.0, 0.0))
    return w * np.sqrt(y) + np.arcsinh(w)


def P(y, sign):
    """P_+(y) = 2y-1+2sqrt(y(y-1)) and P_- = 1/P_+"""
    y = np.asarray(y, dtype=float)
    return np.exp(2.0 * np.sign(sign) * np.arcsinh(np.sqrt(np.maximum(y - 1.0, 0.0))))


def D(kappa, y):
    kappa, y = np.asarray(kappa, dtype=float), np.asarray(y, dtype=float)
    c = kappa * kappa + 0.25
    root = np.sqrt(y * y + c)
    return np.where(y > 0, c / (root + np.abs(y)), root - y)


def N(kappa, y):
    kappa, y = np.asarray(kappa, dtype=float), np.asarray(y, dtype=float)
    return np.sqrt(y * y + kappa * kappa + 0.25) + 0.5


# ---------------------------------------------------------------------------
# physical phase space

def _radius(x):
    r = _norm(x)
    if np.any(r == 0.0):
        raise DomainError("Position must be non-zero (|x| = 0)")
    return r


def conserved_xv(x, v, q):
    """H = |v|^2 + q/|x|, L = x cross v, R = v cross L + (q/2) x/|x|"""
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    r = _radius(x)
    H = _dot(v, v) + q / r
    L = np.cross(x, v)
    R = np.cross(v, L) + 0.5 * q * x / _col(r)
    return H, L, R


def action_xv(x, v, q):
    H, L, R = conserved_xv(x, v, q)
    den = 4.0 * H * _dot(L, L) + q * q
    return _col(2.0 * q * np.sqrt(H) / den) * R + _col(4.0 * H / den) * np.cross(L, R)


def fold_margin_xv(x, v, q, tol_rel=None):
    """Signed distance x.v + sqrt(H) L^2/q to the fold and its tolerance"""
    tol_rel = settings.tol_fold if tol_rel is None else tol_rel
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    H, L, _ = conserved_xv(x, v, q)
    a = np.sqrt(H)
    term = a * _dot(L, L) / q
    margin = _dot(x, v) + term
    scale = q / a + _norm(x) * _norm(v) + term
    return margin, tol_rel * scale


def branch_xv(x, v, q, tol_rel=None):
    margin, tol = fold_margin_xv(x, v, q, tol_rel)
    return np.where(np.abs(margin) < tol, ON_FOLD, np.sign(margin)).astype(int)


def sigma_xv(x, v, q):
    """sigma of the current state, from x.v and kappa without a root solve"""
    H, L, _ = conserved_xv(x, v, q)
    a = np.sqrt(H)
    kappa = a * _norm(L) / q
    Y = a * _dot(x, v) / q
    beta = 0.5 * np.log1p(4.0 * kappa * kappa)
    return -0.5 * (beta + np.arcsinh(2.0 * Y * np.exp(-beta)))


def rho_xa(x, a, q):
    x, a = np.asarray(x, dtype=float), np.asarray(a, dtype=float)
    am = _norm(a)
    return am / (2.0 * q) * (_norm(x) * am + _dot(a, x))


def generating_xa(x, a, iota, q, tol=1e-9):
    """S_iota(x, a) = iota (q/|a|) K(rho) - (|x||a| - x.a)/2"""
    x, a = np.asarray(x, dtype=float), np.asarray(a, dtype=float)
    rho = rho_xa(x, a, q)
    if np.any(rho < 1.0 - tol):
        raise DomainError("Generating function needs rho(x, a) >= 1", rho=np.min(rho).item())
    am = _norm(a)
    return np.asarray(iota) * (q / am) * K(np.maximum(rho, 1.0)) - 0.5 * (_norm(x) * am - _dot(x, a))


def scattering_velocity_xa(x, a, iota, q):
    """grad_x S_iota: the velocity at x of the branch-iota orbit with asymptotic velocity a"""
    x, a = np.asarray(x, dtype=float), np.asarray(a, dtype=float)
    am = _col(_norm(a))
    xhat = x / _col(_norm(x))
    rho = np.maximum(rho_xa(x, a, q), 1.0)
    return _col(0.5 * np.asarray(iota) * dK(rho)) * (am * xhat + a) + 0.5 * (a - am * xhat)


def _theta_from_sigma(x, ahat, am, sigma, q):
    r = _col(_norm(x))
    sigma = _col(sigma)
    return (-0.5 * np.tanh(sigma) * (x + r * ahat) + 0.5 * (x - r * ahat)
            - sigma * (q / _col(am * am)) * ahat)


def angle_xv(x, v, q):
    """(theta, a) of the state; closed form, continuous across the fold"""
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    a = action_xv(x, v, q)
    am = _norm(a)
    ahat = a / _col(am)
    theta = _theta_from_sigma(x, ahat, am, sigma_xv(x, v, q), q)
    return theta, a


def fold_disagreement(x, a, q):
    """|theta_+ - theta_-| from the two generating functions at (x, a)"""
    x, a = np.asarray(x, dtype=float), np.asarray(a, dtype=float)
    am = _norm(a)
    ahat = a / _col(am)
    s = np.arcsinh(np.sqrt(np.maximum(rho_xa(x, a, q) - 1.0, 0.0)))
    return _norm(_theta_from_sigma(x, ahat, am, -s, q) - _theta_from_sigma(x, ahat, am, s, q))


# ---------------------------------------------------------------------------
# the implicit relation eta + sigma + sinh(2 sigma)/2 + kappa^2 e^{2 sigma} = 0

def sigma_residual(sigma, eta, kappa):
    sigma = np.asarray(sigma, dtype=float)
    return eta + sigma + 0.5 * np.sinh(2.0 * sigma) + kappa * kappa * np.exp(2.0 * sigma)


def solve_sigma(eta, kappa):
    """Unique root sigma(eta, kappa) of the strictly increasing relation.

    Safeguarded Newton on a bracket that always contains the root:
    [-b, 0] if eta > -kappa^2, [0, b] otherwise, b = asinh(2|eta + kappa^2|)/2.
    Working in sigma keeps full precision at the fold, where rho - 1 = sinh(sigma)^2.
    """
    eta, kappa = np.broadcast_arrays(np.asarray(eta, dtype=float), np.asarray(kappa, dtype=float))
    k2 = kappa * kappa
    c = eta + k2
    b = 0.5 * np.arcsinh(2.0 * np.abs(c))
    lo = np.where(c > 0, -b, 0.0)
    hi = np.where(c > 0, 0.0, b)
    sigma = np.clip(-c / (2.0 + 2.0 * k2), lo, hi)

    for _ in range(_NEWTON_MAX_ITER):
        g = sigma_residual(sigma, eta, kappa)
        lo = np.where(g < 0, sigma, lo)
        hi = np.where(g > 0, sigma, hi)
        gp = 1.0 + np.cosh(2.0 * sigma) + 2.0 * k2 * np.exp(2.0 * sigma)
        step = g / gp
        # attainable accuracy: relative in sigma plus the rounding level of g
        tiny = 4.0 * _EPS * (np.abs(sigma) + (np.abs(eta) + k2 * np.exp(2.0 * sigma)) / gp)
        converged = (np.abs(step) <= tiny) | (hi - lo <= tiny) | (g == 0)
        trial = sigma - step
        bad = ~((trial >= lo) & (trial <= hi))
        sigma = np.where(bad & ~converged, 0.5 * (lo + hi), np.where(bad, sigma, trial))
        if np.all(converged):
            break
    else:
        logger.warning("sigma solve hit the iteration cap")
    return sigma


def check_branch(eta, kappa, iota, tol=1e-12):
    eta, kappa, iota = np.broadcast_arrays(np.asarray(eta, dtype=float), np.asarray(kappa, dtype=float),
                                           np.asarray(iota))
    c = eta + kappa * kappa
    scale = tol * (1.0 + np.abs(eta) + kappa * kappa)
    wrong = ((iota > 0) & (c < -scale)) | ((iota < 0) & (c > scale))
    if np.any(wrong):
        raise BranchError("(eta, iota) lies on the wrong side of the fold eta = -kappa^2",
                          count=int(np.count_nonzero(wrong)))


def sigma_branch(eta, kappa, iota):
    """sigma on branch iota: -iota asinh(sqrt(rho - 1)), sign clamped on the fold"""
    check_branch(eta, kappa, iota)
    sigma = solve_sigma(eta, kappa)
    iota = np.asarray(iota)
    return np.where(iota > 0, np.minimum(sigma, 0.0), np.where(iota < 0, np.maximum(sigma, 0.0), sigma))


def rho_relation_residual(rho, eta, kappa, iota):
    """eta - iota G(rho) + kappa^2 P_{-iota}(rho)"""
    iota = np.asarray(iota)
    return eta - iota * G(rho) + kappa * kappa * P(rho, -iota)


# ---------------------------------------------------------------------------
# super-integrable coordinates

def sic_from_aa(theta, a, q):
    theta, a = np.asarray(theta, dtype=float), np.asarray(a, dtype=float)
    am = _norm(a)
    if np.any(am == 0.0):
        raise DomainError("Action must be non-zero (|a| = 0)")
    xi = q / am
    eta = am * _dot(theta, a) / q
    return xi, eta, np.cross(theta, a), a / _col(am)


def aa_from_sic(xi, eta, L, u, q):
    xi, eta = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
    theta = _col(xi * xi * eta / q) * u - _col(xi / q) * np.cross(L, u)
    return theta, _col(q / xi) * u


def xv_from_sic(xi, eta, L, u, q):
    """X = X1 u + X3 L x u, V = V1 u + V3 L x u; valid for either sign of xi"""
    xi, eta = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
    L, u = np.asarray(L, dtype=float), np.asarray(u, dtype=float)
    kappa = _norm(L) / np.abs(xi)
    s = 1.0 + 4.0 * kappa * kappa
    y = eta + solve_sigma(eta, kappa)
    d = D(kappa, y)
    n = N(kappa, y)
    Lxu = np.cross(L, u)
    X = _col(xi * xi / q * (y + 0.5 + d / s)) * u - _col(xi / q * (1.0 + 2.0 * d / s)) * Lxu
    V = (_col(q / xi * (1.0 - 0.5 / n - d / (s * n))) * u
         + _col(q / (xi * xi) * (2.0 * d / (s * n))) * Lxu)
    return X, V


def past_sic(xi, eta, L, u):
    """Past coordinates anchored at periapsis; an involution"""
    xi, eta = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
    L, u = np.asarray(L, dtype=float), np.asarray(u, dtype=float)
    k2 = (_norm(L) / np.abs(xi)) ** 2
    s = 1.0 + 4.0 * k2
    u_past = (_col(1.0 - 4.0 * k2) * u - _col(4.0 / xi) * np.cross(L, u)) / _col(s)
    return -xi, -eta + 0.5 * np.log1p(4.0 * k2), L.copy(), u_past


def propagate_xv(x, v, t, q):
    """Exact Kepler flow: inverse transform of the linear flow theta -> theta + t a"""
    theta, a = angle_xv(x, v, q)
    xi, eta, L, u = sic_from_aa(theta, a, q)
    eta = eta + np.asarray(t, dtype=float) * q * q / xi ** 3
    return xv_from_sic(xi, eta, L, u, q)


# ---------------------------------------------------------------------------

class KeplerService:
    """Operations on the model types; all pure and batch-capable"""

    @staticmethod
    def conserved(s: PhaseState, p: Params) -> ConservedSet:
        H, L, R = conserved_xv(s.x, s.v, p.q)
        return ConservedSet(H=H, Lvec=L, R=R)

    @staticmethod
    def action(s: PhaseState, p: Params) -> np.ndarray:
        return action_xv(s.x, s.v, p.q)

    @staticmethod
    def past_action(s: PhaseState, p: Params) -> np.ndarray:
        """Backward asymptotic velocity a^- = -|a| u^-"""
        theta, a = angle_xv(s.x, s.v, p.q)
        xi, eta, L, u = sic_from_aa(theta, a, p.q)
        _, _, _, u_past = past_sic(xi, eta, L, u)
        return -_col(_norm(a)) * u_past

    @staticmethod
    def rho_of_xa(x, a, p: Params):
        return rho_xa(x, a, p.q)

    @staticmethod
    def fold_branch(s: PhaseState, p: Params, tol_rel: float = None):
        return branch_xv(s.x, s.v, p.q, tol_rel)

    @staticmethod
    def generating(x, a, iota, p: Params):
        return generating_xa(x, a, iota, p.q)

    @staticmethod
    def angle(s: PhaseState, p: Params) -> ActionAngle:
        theta, a = angle_xv(s.x, s.v, p.q)
        branch = branch_xv(s.x, s.v, p.q)
        on_fold = branch == ON_FOLD
        if np.any(on_fold):
            # both generating functions must agree on the fold
            gap = fold_disagreement(s.x, a, p.q)
            scale = p.q / _norm(a) ** 2 + _norm(s.x)
            worst = float(np.max(np.where(on_fold, gap / scale, 0.0)))
            if worst > 1e-6:
                logger.warning(f"fold branches disagree by {worst:.3e} (relative)")
        return ActionAngle(theta=theta, a=a, branch=branch)

    @staticmethod
    def rho_solve(eta, kappa, iota):
        sigma = sigma_branch(eta, kappa, iota)
        return np.cosh(sigma) ** 2

    @staticmethod
    def sigma(eta, kappa, iota) -> RhoSigma:
        sigma = sigma_branch(eta, kappa, iota)
        return RhoSigma(rho=np.cosh(sigma) ** 2, sigma=sigma, branch=np.asarray(iota))

    @staticmethod
    def to_sic(aa: ActionAngle, p: Params) -> SICCoords:
        xi, eta, L, u = sic_from_aa(aa.theta, aa.a, p.q)
        return SICCoords(xi=xi, eta=eta, Lvec=L, u=u)

    @staticmethod
    def from_sic(c: SICCoords, p: Params) -> ActionAngle:
        theta, a = aa_from_sic(c.xi, c.eta, c.Lvec, c.u, p.q)
        return ActionAngle(theta=theta, a=a)

    @staticmethod
    def position(c: SICCoords, p: Params) -> np.ndarray:
        return xv_from_sic(c.xi, c.eta, c.Lvec, c.u, p.q)[0]

    @staticmethod
    def velocity(c: SICCoords, p: Params) -> np.ndarray:
        return xv_from_sic(c.xi, c.eta, c.Lvec, c.u, p.q)[1]

    @staticmethod
    def linear_flow(aa: ActionAngle, t) -> ActionAngle:
        return ActionAngle(theta=aa.theta + _col(np.asarray(t, dtype=float)) * aa.a, a=aa.a.copy())

    @staticmethod
    def kepler_propagate(s: PhaseState, t, p: Params) -> PhaseState:
        X, V = propagate_xv(s.x, s.v, t, p.q)
        return PhaseState(x=X, v=V)

    @staticmethod
    def periapsis(s: PhaseState, p: Params):
        """Time to periapsis (negative once passed) and the periapsis state"""
        theta, a = angle_xv(s.x, s.v, p.q)
        xi, eta, L, u = sic_from_aa(theta, a, p.q)
        kappa = _norm(L) / xi
        eta_p = 0.25 * np.log1p(4.0 * kappa * kappa)
        t_p = (eta_p - eta) * xi ** 3 / (p.q * p.q)
        X, V = xv_from_sic(xi, eta_p, L, u, p.q)
        return t_p, PhaseState(x=X, v=V)

    @staticmethod
    def past_coords(c: SICCoords) -> SICCoords:
        xi, eta, L, u = past_sic(c.xi, c.eta, c.Lvec, c.u)
        return SICCoords(xi=xi, eta=eta, Lvec=L, u=u)

    @staticmethod
    def time_reversed(c: SICCoords) -> SICCoords:
        """(xi, eta, L, u) -> (-xi, eta, -L, u): coordinates of (x, -v) from past ones"""
        return SICCoords(xi=-c.xi, eta=c.eta.copy(), Lvec=-c.Lvec, u=c.u.copy())

    @staticmethod
    def scattering_solutions(x0, a, p: Params, tol: float = 1e-10):
        """Velocities at x0 of the orbits with asymptotic velocity a, ordered by |L|"""
        x0, a = np.asarray(x0, dtype=float), np.asarray(a, dtype=float)
        if _norm(x0) == 0.0 or _norm(a) == 0.0:
            raise DomainError("scattering needs |x0| > 0 and |a| > 0")
        rho = float(rho_xa(x0, a, p.q))
        if rho < 1.0 - tol:
            return []
        if rho <= 1.0 + tol:
            return [0.5 * (a - _norm(a) * x0 / _norm(x0))]
        candidates = [scattering_velocity_xa(x0, a, iota, p.q) for iota in (-1, 1)]
        return sorted(candidates, key=lambda v: _norm(np.cross(x0, v)))
