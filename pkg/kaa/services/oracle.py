"""
Independent Runge-Kutta integration of x'' = (q/2) x/|x|^3.

Ground truth for the exact transforms; shares no code with kepler_core.
"""

import numpy as np
from scipy.integrate import solve_ivp

from kaa.exceptions import OracleError
from kaa.models.params import Params
from kaa.models.phase import PhaseState


def _rhs(q):
    def rhs(_, z):
        x = z[:3]
        r = np.sqrt(x @ x)
        return np.concatenate([z[3:], 0.5 * q * x / r ** 3])
    return rhs


def rk_trajectory(x, v, times, q: float, tol: float = 1e-12):
    """States at the requested times (monotone, starting anywhere) from (x, v) at t = 0"""
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not tol > 0:
        raise OracleError("Oracle tolerance must be positive", tol=tol)
    if x @ x == 0.0:
        raise OracleError("Oracle started at the singularity")
    t_final = times[np.argmax(np.abs(times))]
    if t_final == 0.0:
        return np.tile(x, (times.size, 1)), np.tile(v, (times.size, 1))

    direction = np.sign(t_final)
    span = times * direction
    order = np.argsort(span, kind='stable')
    sol = solve_ivp(_rhs(q), (0.0, t_final), np.concatenate([x, v]), method='DOP853',
                    rtol=tol, atol=tol, dense_output=True)
    if not sol.success:
        raise OracleError(f"Oracle integration failed: {sol.message}", t=float(t_final))
    states = sol.sol(times[order]).T
    if np.any(np.linalg.norm(states[:, :3], axis=1) == 0.0):
        raise OracleError("Oracle trajectory reached the singularity")
    result = np.empty_like(states)
    result[order] = states
    return result[:, :3], result[:, 3:]


def rk_oracle(s: PhaseState, t: float, p: Params, tol: float = 1e-12) -> PhaseState:
    """Adaptive DOP853 solution at time t"""
    if t == 0:
        return PhaseState(x=s.x.copy(), v=s.v.copy())
    sol = solve_ivp(_rhs(p.q), (0.0, float(t)), np.concatenate([s.x, s.v]), method='DOP853',
                    rtol=tol, atol=tol)
    if not sol.success:
        raise OracleError(f"Oracle integration failed: {sol.message}", t=float(t))
    z = sol.y[:, -1]
    return PhaseState(x=z[:3], v=z[3:])
