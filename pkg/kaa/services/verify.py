"""
Property suites binding the Kepler transforms, brackets and flow to their
stated identities and bounds. Every suite is deterministic in (seed, n).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import brentq

from kaa.config import settings
from kaa.exceptions import UnknownSuiteError
from kaa.models.charge import SamplerSpec, SimConfig
from kaa.models.phase import PhaseState
from kaa.models.params import Params
from kaa.models.report import SuiteReport
from kaa.services import kepler_core as kc
from kaa.services.brackets import BracketService
from kaa.services.field import in_close_region, in_far_region
from kaa.services.oracle import rk_oracle, rk_trajectory
from kaa.services.sim import SimulationService
from kaa.utils.logger import get_logger, log_with_context

logger = get_logger('kaa.verify')

Q_DEFAULT = 1.0
TABLE_SAMPLES = 20
XV_BRACKET_SAMPLES = 100
CHART_TOLERANCE = 1e-4
ORACLE_SAMPLES = 1000
FLOW_DERIVATIVE_SAMPLES = 100
DEFAULT_SAMPLES = {
    'roundtrip': 100000,
    'canonicity': 1000,
    'flow': 1000,
    'bounds': 1000000,
    'transitions': 1000,
    'integrator': 100,
}
# a fitted constant may grow at most this much when the sample size doubles
FIT_GROWTH_LIMIT = 4.0


# ---------------------------------------------------------------------------
# samplers

def _log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), n))


def _unit(rng, n):
    z = rng.standard_normal((n, 3))
    return z / np.linalg.norm(z, axis=1)[:, None]


def _orthogonal_unit(rng, u):
    w = _unit(rng, u.shape[0])
    w -= (w * u).sum(1)[:, None] * u
    return w / np.linalg.norm(w, axis=1)[:, None]


def sample_states(rng, n, q=Q_DEFAULT, a_range=(0.1, 10.0), r_range=(0.1, 100.0)):
    """Uniform directions, log-uniform |a| and |x|; draws with a^2 < q/r are rejected"""
    xs, vs = [], []
    count = 0
    while count < n:
        m = 2 * (n - count) + 16
        am = _log_uniform(rng, *a_range, m)
        r = _log_uniform(rng, *r_range, m)
        x_dir, v_dir = _unit(rng, m), _unit(rng, m)
        keep = am * am >= q / r
        speed = np.sqrt(np.maximum(am * am - q / r, 0.0))
        xs.append((r[:, None] * x_dir)[keep])
        vs.append((speed[:, None] * v_dir)[keep])
        count += int(keep.sum())
    return np.concatenate(xs)[:n], np.concatenate(vs)[:n]


def sample_near_fold(rng, n, q=Q_DEFAULT, delta=1e-3):
    """States with eta = -kappa^2 + d, |d| <= delta, built through SIC"""
    am = _log_uniform(rng, 0.1, 10.0, n)
    kappa = _log_uniform(rng, 1e-2, 10.0, n)
    u = _unit(rng, n)
    xi = q / am
    L = (kappa * xi)[:, None] * _orthogonal_unit(rng, u)
    eta = -kappa * kappa + rng.uniform(-delta, delta, n)
    return kc.xv_from_sic(xi, eta, L, u, q)


def sample_sic(rng, n, q=Q_DEFAULT, eta_scale=10.0):
    am = _log_uniform(rng, 0.1, 10.0, n)
    kappa = _log_uniform(rng, 1e-2, 10.0, n)
    u = _unit(rng, n)
    xi = q / am
    L = (kappa * xi)[:, None] * _orthogonal_unit(rng, u)
    eta = rng.uniform(-eta_scale, eta_scale, n)
    return xi, eta, L, u


def _moderate_states(rng, n, q=Q_DEFAULT):
    """Range used by finite-difference checks, where step scaling stays well conditioned"""
    return sample_states(rng, n, q, a_range=(0.3, 3.0), r_range=(0.3, 10.0))


def _rel(diff, scale):
    return np.linalg.norm(diff, axis=-1) / scale


def _fit_growth(values):
    """sup over all samples divided by sup over the first half"""
    values = np.asarray(values, dtype=float)
    half = values[: max(values.size // 2, 1)]
    return float(values.max() / half.max()) if half.max() > 0 else 1.0


def _bracket_tables(check, indices):
    """Per-sample bracket reports on the configured thread pool, in index order"""
    with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as pool:
        return list(pool.map(check, indices))


def _worst(tables, tolerance):
    """(max residual, tolerance, sample) in add_check order"""
    i = int(np.argmax([t.max_residual for t in tables]))
    return tables[i].max_residual, tolerance, i


# ---------------------------------------------------------------------------

class VerifyService:
    """Suites return SuiteReport; the report fails if any check misses its tolerance"""

    @staticmethod
    def suite_roundtrip(seed: int, n: int) -> SuiteReport:
        report = SuiteReport(suite='roundtrip', seed=seed, n=n)
        if n == 0:
            return report
        rng = np.random.default_rng(seed)
        q = Q_DEFAULT
        n_fold = min(max(n // 100, 1), n)
        x, v = sample_states(rng, n - n_fold, q)
        xf, vf = sample_near_fold(rng, n_fold, q)
        x, v = np.concatenate([x, xf]), np.concatenate([v, vf])

        theta, a = kc.angle_xv(x, v, q)
        X, V = kc.xv_from_sic(*kc.sic_from_aa(theta, a, q), q)
        scale_v = np.linalg.norm(v, axis=1) + np.linalg.norm(a, axis=1)
        err = np.maximum(_rel(X - x, np.linalg.norm(x, axis=1)), _rel(V - v, scale_v))
        report.add_check('xv_roundtrip', err.max(), 1e-9, sample=int(np.argmax(err)))
        report.add_check('near_fold_roundtrip', err[-n_fold:].max(), 1e-9,
                         sample=int(n - n_fold + np.argmax(err[-n_fold:])))

        # homogeneity: (x, v, q) -> (alpha x, beta v, alpha beta^2 q) maps (theta, a) -> (alpha theta, beta a)
        alpha, beta = 4.0, 0.5
        theta_s, a_s = kc.angle_xv(alpha * x, beta * v, alpha * beta * beta * q)
        theta_scale = np.linalg.norm(theta, axis=1) + q / np.linalg.norm(a, axis=1) ** 2
        scaling = np.maximum(_rel(theta_s - alpha * theta, alpha * theta_scale),
                             _rel(a_s - beta * a, beta * np.linalg.norm(a, axis=1)))
        report.add_check('scaling', scaling.max(), 1e-9, sample=int(np.argmax(scaling)))
        return report

    @staticmethod
    def suite_canonicity(seed: int, n: int) -> SuiteReport:
        report = SuiteReport(suite='canonicity', seed=seed, n=n)
        if n == 0:
            return report
        rng = np.random.default_rng(seed)
        q = Q_DEFAULT
        x, v = _moderate_states(rng, n, q)
        z = np.concatenate([x, v], axis=1)
        steps = 1e-5 * (1.0 + np.abs(z))
        jac = np.empty((n, 6, 6))
        for k in range(6):
            zp, zm = z.copy(), z.copy()
            zp[:, k] += steps[:, k]
            zm[:, k] -= steps[:, k]
            fp = np.concatenate(kc.angle_xv(zp[:, :3], zp[:, 3:], q), axis=1)
            fm = np.concatenate(kc.angle_xv(zm[:, :3], zm[:, 3:], q), axis=1)
            jac[:, :, k] = (fp - fm) / (zp[:, k] - zm[:, k])[:, None]
        det_err = np.abs(np.linalg.det(jac) - 1.0)
        report.add_check('jacobian_determinant', det_err.max(), 1e-5, sample=int(np.argmax(det_err)))

        tables = _bracket_tables(lambda i: BracketService.check_canonical(x[i], v[i], q), range(n))
        report.add_check('canonical_brackets', *_worst(tables, 1e-5))

        tables = _bracket_tables(lambda i: BracketService.check_chart_invariance(x[i], v[i], q), range(n))
        report.add_check('chart_invariance', *_worst(tables, CHART_TOLERANCE))

        m = min(n, XV_BRACKET_SAMPLES)
        times = 10.0 ** rng.uniform(-1.0, 1.0, m)
        tables = _bracket_tables(lambda i: BracketService.check_xv_brackets(x[i], v[i], times[i], q), range(m))
        report.add_check('xv_brackets', *_worst(tables, CHART_TOLERANCE))
        return report

    @staticmethod
    def suite_flow(seed: int, n: int) -> SuiteReport:
        report = SuiteReport(suite='flow', seed=seed, n=n)
        if n == 0:
            return report
        rng = np.random.default_rng(seed)
        q = Q_DEFAULT
        p = Params(q=q)
        x, v = _moderate_states(rng, n, q)

        t = 100.0
        m = min(n, ORACLE_SAMPLES)
        X, _ = kc.propagate_xv(x[:m], v[:m], t, q)
        err = np.empty(m)
        for i in range(m):
            truth = rk_oracle(PhaseState(x=x[i], v=v[i]), t, p, tol=1e-12)
            err[i] = np.linalg.norm(X[i] - truth.x) / np.linalg.norm(truth.x)
        report.add_check('oracle_position_t100', err.max(), 1e-6, sample=int(np.argmax(err)))

        # d theta/dt = a along oracle trajectories, central difference with step 1
        k = min(n, FLOW_DERIVATIVE_SAMPLES)
        rate_err = np.empty(k)
        for i in range(k):
            xs, vs = rk_trajectory(x[i], v[i], [49.0, 50.0, 51.0], q, tol=1e-12)
            theta, a = kc.angle_xv(xs, vs, q)
            rate = 0.5 * (theta[2] - theta[0])
            rate_err[i] = np.linalg.norm(rate - a[1]) / np.linalg.norm(a[1])
        report.add_check('angle_rate_equals_action', rate_err.max(), 1e-6, sample=int(np.argmax(rate_err)))

        # group law and t = 0 identity of the exact flow
        X1, V1 = kc.propagate_xv(*kc.propagate_xv(x, v, 3.0, q), 7.0, q)
        X2, V2 = kc.propagate_xv(x, v, 10.0, q)
        group = np.maximum(_rel(X1 - X2, np.linalg.norm(X2, axis=1)),
                           _rel(V1 - V2, np.linalg.norm(V2, axis=1)))
        report.add_check('group_law', group.max(), 1e-9, sample=int(np.argmax(group)))
        X0, V0 = kc.propagate_xv(x, v, 0.0, q)
        ident = np.maximum(_rel(X0 - x, np.linalg.norm(x, axis=1)),
                           _rel(V0 - v, np.linalg.norm(v, axis=1) + 1.0))
        report.add_check('identity_t0', ident.max(), 1e-9, sample=int(np.argmax(ident)))
        return report

    @staticmethod
    def suite_bounds(seed: int, n: int) -> SuiteReport:
        report = SuiteReport(suite='bounds', seed=seed, n=n)
        if n == 0:
            return report
        rng = np.random.default_rng(seed)
        q = Q_DEFAULT
        x, v = sample_states(rng, n, q)
        theta, a = kc.angle_xv(x, v, q)
        xi, eta, L, u = kc.sic_from_aa(theta, a, q)
        am = np.linalg.norm(a, axis=1)
        kappa = np.linalg.norm(L, axis=1) / xi

        sigma = kc.sigma_xv(x, v, q)
        bound = np.log(1.0 + 2.0 * np.sqrt(np.abs(eta)) + 2.0 * kappa)
        excess = np.maximum(np.abs(sigma) - bound, 0.0) / (1.0 + bound)
        report.add_check('sigma_bound', excess.max(), 1e-9, sample=int(np.argmax(excess)))

        Y = am * (x * v).sum(1) / q
        ratio = np.sqrt(Y * Y + kappa * kappa + 0.25) / np.sqrt(eta * eta + kappa * kappa + 0.25)
        outside = np.maximum(np.maximum(0.1 - ratio, ratio - 10.0), 0.0)
        report.add_check('xv_comparable_to_eta', outside.max(), 1e-12, sample=int(np.argmax(outside)))

        # explicit |X| bounds along the linear flow
        t = 10.0 ** rng.uniform(0.0, 3.0, n)
        Xt, Vt = kc.xv_from_sic(xi, eta + t * q * q / xi ** 3, L, u, q)
        r = np.linalg.norm(Xt, axis=1)
        slack = 100.0 * (1.0 + q / am ** 2 * (np.abs(eta) + kappa))
        bad = np.maximum(np.maximum(t * am / 100.0 - slack - r, r - 100.0 * t * am - slack), 0.0)
        report.add_check('position_bounds', (bad / (r + slack)).max(), 1e-12, sample=int(np.argmax(bad)))
        fitted = r / (t * am + 1.0 + q / am ** 2 * (np.abs(eta) + kappa))
        report.fitted_constants['position'] = float(fitted.max())
        report.add_check('position_constant_growth', _fit_growth(fitted), FIT_GROWTH_LIMIT)

        VerifyService._rho_checks(report, rng, n)
        VerifyService._bulk_checks(report, rng, min(n, 10000), q)

        # periapsis anchor: x.v vanishes at eta_p = ln(1 + 4 kappa^2)/4
        eta_p = 0.25 * np.log1p(4.0 * kappa * kappa)
        Xp, Vp = kc.xv_from_sic(xi, eta_p, L, u, q)
        xv = np.abs((Xp * Vp).sum(1)) / (np.linalg.norm(Xp, axis=1) * np.linalg.norm(Vp, axis=1))
        report.add_check('periapsis_anchor', xv.max(), 1e-8, sample=int(np.argmax(xv)))
        return report

    @staticmethod
    def _rho_checks(report, rng, n):
        """Implicit relation residual over rho in [1, 1e10].

        eta is built by forward evaluation of G and P at a sampled rho and the
        residual is taken in rho itself. Below rho - 1 = 1e-6 that form is
        ill-conditioned, so the fold layer is checked in the sigma form.
        """
        iota = rng.choice([-1, 1], n)
        kappa = _log_uniform(rng, 1e-3, 1e3, n)
        rho = 1.0 + 10.0 ** rng.uniform(-6.0, 10.0, n)
        rho[: max(n // 100, 1)] = 1.0
        eta = iota * kc.G(rho) - kappa * kappa * kc.P(rho, -iota)
        rho_hat = np.cosh(kc.sigma_branch(eta, kappa, iota)) ** 2
        residual = np.abs(kc.rho_relation_residual(rho_hat, eta, kappa, iota)) / (1.0 + np.abs(eta))
        report.add_check('rho_relation', residual.max(), 1e-10, sample=int(np.argmax(residual)))

        s = -iota * np.arcsinh(10.0 ** rng.uniform(-6.0, -3.0, n))
        eta = -(s + 0.5 * np.sinh(2.0 * s) + kappa * kappa * np.exp(2.0 * s))
        sigma = kc.sigma_branch(eta, kappa, iota)
        residual = np.abs(kc.sigma_residual(sigma, eta, kappa)) / (1.0 + np.abs(eta))
        report.add_check('rho_relation_fold_layer', residual.max(), 1e-10, sample=int(np.argmax(residual)))

    @staticmethod
    def _bulk_checks(report, rng, n, q, t=1e7, speed=0.1, spread=1e-3):
        """Bulk-zone bounds at a late time on samples drawn inside the zone"""
        bulk = []
        count = 0
        while count < n:
            m = 2 * (n - count) + 16
            xi, eta, L, u = sample_sic(rng, m, q, eta_scale=1e3)
            theta, a = kc.aa_from_sic(xi, eta, L, u, q)
            keep = SimulationService.in_bulk(theta, a, t, q, speed, spread)
            bulk.append((xi[keep], eta[keep], L[keep], u[keep]))
            count += int(keep.sum())
        xi, eta, L, u = (np.concatenate(parts)[:n] for parts in zip(*bulk))
        am = q / xi
        kappa = np.linalg.norm(L, axis=1) / xi
        eta_t = eta + t * q * q / xi ** 3
        base = t * am ** 3 / q
        rho = np.cosh(kc.solve_sigma(eta_t, kappa)) ** 2
        X, V = kc.xv_from_sic(xi, eta_t, L, u, q)
        r = np.linalg.norm(X, axis=1)
        a_vec = am[:, None] * u
        violation = np.maximum.reduce([
            np.maximum(eta_t / base - 2.0, 0.0),
            np.maximum(0.5 - eta_t / base, 0.0),
            np.maximum(0.125 - rho / base, 0.0),
            np.maximum(1e-3 - r / (t * am), 0.0),
            np.maximum(r / (t * am) - 1e3, 0.0),
        ])
        report.add_check('bulk_bounds', violation.max(), 1e-12, sample=int(np.argmax(violation)))

        tb = math.sqrt(1.0 + t * t)
        v_const = np.linalg.norm(V - a_vec, axis=1) * tb * q / xi ** 2
        z_const = np.linalg.norm(X - t * V, axis=1) / (xi ** 2 / q * (math.log(tb) + 1.0 + np.abs(eta) + kappa))
        report.fitted_constants['bulk_velocity'] = float(v_const.max())
        report.fitted_constants['bulk_offset'] = float(z_const.max())
        report.add_check('bulk_constant_growth', max(_fit_growth(v_const), _fit_growth(z_const)),
                         FIT_GROWTH_LIMIT)

    @staticmethod
    def suite_transitions(seed: int, n: int) -> SuiteReport:
        report = SuiteReport(suite='transitions', seed=seed, n=n)
        if n == 0:
            return report
        rng = np.random.default_rng(seed)
        q = Q_DEFAULT
        p = Params(q=q)
        xi, eta, L, u = sample_sic(rng, n, q)
        X, V = kc.xv_from_sic(xi, eta, L, u, q)
        past = kc.past_sic(xi, eta, L, u)
        Xm, Vm = kc.xv_from_sic(*past, q)
        scale_x = np.linalg.norm(X, axis=1)
        scale_v = np.linalg.norm(V, axis=1) + q / xi
        agree = np.maximum(_rel(Xm - X, scale_x), _rel(Vm - V, scale_v))
        report.add_check('past_xv_agreement', agree.max(), 1e-9, sample=int(np.argmax(agree)))

        xi_m, eta_m, L_m, u_m = past
        Xr, Vr = kc.xv_from_sic(-xi_m, eta_m, -L_m, u_m, q)
        flip = np.maximum(_rel(Xr - X, scale_x), _rel(Vr + V, scale_v))
        report.add_check('reversed_velocity_flip', flip.max(), 1e-9, sample=int(np.argmax(flip)))

        xi2, eta2, L2, u2 = kc.past_sic(*past)
        involution = np.maximum.reduce([np.abs(xi2 - xi) / xi, np.abs(eta2 - eta) / (1.0 + np.abs(eta)),
                                        _rel(L2 - L, q / xi), _rel(u2 - u, 1.0)])
        report.add_check('past_involution', involution.max(), 1e-12, sample=int(np.argmax(involution)))

        # periapsis from the root of x.v along the exact flow
        m = min(n, ORACLE_SAMPLES)
        gaps = np.empty(m)
        for i in range(m):
            gaps[i] = VerifyService._periapsis_gap(xi[i], eta[i], L[i], u[i], q)
        report.add_check('periapsis_eta', gaps.max(), 1e-8, sample=int(np.argmax(gaps)))

        x, v = _moderate_states(rng, n, q)
        k = min(n, TABLE_SAMPLES)
        for label, check in (
                ('sic', lambda i: BracketService.check_sic_table(x[i], v[i], q)),
                ('sic_past', lambda i: BracketService.check_sic_table(x[i], v[i], q, past=True)),
                ('transition', lambda i: BracketService.check_transition_brackets(x[i], v[i], q))):
            report.add_check(f'brackets_{label}', *_worst(_bracket_tables(check, range(k)), 1e-5))

        crossings = np.empty(m, dtype=int)
        reentry = np.zeros(m, dtype=bool)
        times = np.linspace(0.0, 200.0, 2001)
        xo, vo = sample_states(rng, m, q)
        for i in range(m):
            xs, _ = rk_trajectory(xo[i], vo[i], times, p.q, tol=1e-10)
            inside = in_close_region(xs, times)
            far = in_far_region(xs, times)
            crossings[i] = int(np.count_nonzero(inside[1:] != inside[:-1]))
            # once strictly far after being strictly close, the orbit stays far
            close_only = np.flatnonzero(inside & ~far)
            if close_only.size:
                later = np.flatnonzero(far & ~inside)
                later = later[later > close_only[0]]
                reentry[i] = bool(later.size) and not far[later[0]:].all()
        report.fitted_constants['max_close_region_crossings'] = int(crossings.max())
        excess = np.maximum(crossings - 2, 0)
        report.add_check('close_region_crossings', float(excess.max()), 0.5, sample=int(np.argmax(crossings)))
        report.add_check('far_region_persistence', float(reentry.sum()), 0.5, sample=int(np.argmax(reentry)))
        return report

    @staticmethod
    def _periapsis_gap(xi, eta, L, u, q):
        """|eta at the root of x.v - ln(1+4 kappa^2)/4| / (1 + eta_p)"""
        kappa = np.linalg.norm(L) / xi
        eta_p = 0.25 * math.log1p(4.0 * kappa * kappa)

        def xv_at(e):
            X, V = kc.xv_from_sic(xi, e, L, u, q)
            return float(X @ V)

        width = 1.0 + abs(eta - eta_p)
        lo, hi = eta_p - width, eta_p + width
        while xv_at(lo) > 0:
            lo -= width
        while xv_at(hi) < 0:
            hi += width
        root = brentq(xv_at, lo, hi, xtol=1e-13, rtol=4.0 * np.finfo(float).eps)
        return abs(root - eta_p) / (1.0 + eta_p)

    @staticmethod
    def suite_integrator(seed: int, n: int) -> SuiteReport:
        """dt-halving order, softening stability and exact field-free drift on an n-particle gas"""
        report = SuiteReport(suite='integrator', seed=seed, n=n)
        if n == 0:
            return report
        sampler = SamplerSpec(type='gaussian', center_x=[3.0, 0.0, 0.0], center_v=[0.0, 0.5, 0.0],
                              widths=[0.5, 0.2], amplitude=1.0)
        cfg = SimConfig(params=Params(q=Q_DEFAULT, Q=1.0, Qc=1.0, mg=1.0, Mc=2.0 * math.pi),
                        n=n, eps=0.1, dt=0.1, t_end=2.0, seed=seed, sampler=sampler, diag_every=1)

        states = [VerifyService._integrate(cfg, cfg.dt / 2 ** k, cfg.t_end) for k in range(3)]
        coarse = np.linalg.norm(states[0] - states[1])
        fine = np.linalg.norm(states[1] - states[2])
        ratio = coarse / fine if fine > 0 else float('inf')
        report.fitted_constants['order_ratio'] = float(ratio)
        report.add_check('dt_halving_ratio', abs(ratio - 4.0), 0.5)

        # softening halved at the finer dt: the kick on the charge must not move
        halved = VerifyService._integrate(cfg, cfg.dt / 2, cfg.t_end, eps=cfg.eps / 2)
        kick, kick_halved = states[1][-3:] - cfg.charge_v0, halved[-3:] - cfg.charge_v0
        eps_shift = np.linalg.norm(kick_halved - kick) / np.linalg.norm(kick)
        report.fitted_constants['eps_halving_state_shift'] = float(
            np.linalg.norm(halved - states[1]) / np.linalg.norm(states[1]))
        report.add_check('eps_halving_charge_kick', eps_shift, 0.05)

        free = SimConfig(params=Params(q=Q_DEFAULT, Q=0.0, Qc=0.0), n=n, eps=0.0, dt=0.02,
                         t_end=200.0, seed=seed, sampler=sampler, diag_every=1)
        ens, charge = SimulationService.init(free)
        h0 = (ens.v * ens.v).sum(1) + Q_DEFAULT / np.linalg.norm(ens.x, axis=1)
        for k in range(free.n_steps):
            SimulationService.step(ens, charge, free.params, free.eps, free.dt, t_next=(k + 1) * free.dt)
        h = (ens.v * ens.v).sum(1) + Q_DEFAULT / np.linalg.norm(ens.x, axis=1)
        drift = np.abs(h - h0) / h0
        report.add_check('field_free_energy', drift.max(), 1e-12, sample=int(np.argmax(drift)))
        return report

    @staticmethod
    def _integrate(cfg, dt, t_end, eps=None):
        eps = cfg.eps if eps is None else eps
        ens, charge = SimulationService.init(cfg)
        for k in range(int(round(t_end / dt))):
            SimulationService.step(ens, charge, cfg.params, eps, dt, t_next=(k + 1) * dt)
        return np.concatenate([ens.x.ravel(), ens.v.ravel(), charge.X, charge.V])


SUITES = {
    'roundtrip': VerifyService.suite_roundtrip,
    'canonicity': VerifyService.suite_canonicity,
    'flow': VerifyService.suite_flow,
    'bounds': VerifyService.suite_bounds,
    'transitions': VerifyService.suite_transitions,
    'integrator': VerifyService.suite_integrator,
}


def resolve_suites(name: str):
    if name == 'all':
        return sorted(SUITES)
    if name not in SUITES:
        raise UnknownSuiteError(f"Unknown suite: {name}", allowed=sorted(SUITES) + ['all'])
    return [name]


def run_suites(name: str, seed: int = 0, samples: int = None, threads: int = None):
    """Run one suite or all of them concurrently; reports ordered by suite name"""
    names = resolve_suites(name)

    def run_one(suite):
        n = DEFAULT_SAMPLES[suite] if samples is None else int(samples)
        report = SUITES[suite](seed, n)
        log_with_context(logger, logging.INFO if report.passed else logging.WARNING,
                         f"suite {suite}: {'pass' if report.passed else 'FAIL'} "
                         f"(max residual {report.max_residual:.3e})",
                         suite=suite, seed=seed, samples=n, max_residual=report.max_residual)
        return report

    workers = max(1, min(len(names), threads or settings.threads))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(run_one, names))
    return sorted(reports, key=lambda r: r.suite)
