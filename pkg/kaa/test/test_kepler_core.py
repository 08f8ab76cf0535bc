import math
import unittest

import numpy as np

from kaa.config import settings
from kaa.exceptions import BranchError, DomainError
from kaa.models.params import Params
from kaa.models.phase import ON_FOLD, ActionAngle, PhaseState, SICCoords
from kaa.services import kepler_core as kc
from kaa.services.kepler_core import KeplerService
from kaa.services.oracle import rk_oracle, rk_trajectory
from kaa.test import BaseTestCase

LN2 = math.log(2.0)
SQ3 = math.sqrt(3.0)
G2 = math.sqrt(2.0) + math.asinh(1.0)


def random_sic(rng, n, q=1.0):
    """Consistent SIC tuples: u unit, L orthogonal to u"""
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    w = rng.standard_normal((n, 3))
    w -= (w * u).sum(1)[:, None] * u
    w /= np.linalg.norm(w, axis=1)[:, None]
    L = rng.uniform(0.0, 2.0, n)[:, None] * w
    return rng.uniform(0.5, 3.0, n), 3.0 * rng.standard_normal(n), L, u


class TestSpecialFunctions(BaseTestCase):
    """Special function helpers"""

    def test_k(self):
        """Test case for K

        K(1) = 0, closed form at 2, and continuity across the series switch
        """
        self.assertEqual(float(kc.K(1.0)), 0.0)
        self.assertAlmostEqual(float(kc.K(2.0)), math.sqrt(2.0) - math.log(1.0 + math.sqrt(2.0)), places=14)
        w = 1e-2
        for s in ((1.0 + w * w) * (1 - 1e-12), (1.0 + w * w) * (1 + 1e-12)):
            ws = math.sqrt(s - 1.0)
            self.assertAllClose(kc.K(s), ws * math.sqrt(s) - math.asinh(ws), rtol=1e-9)

    def test_dk(self):
        """Test case for dK

        K' equals a central difference of K
        """
        h = 1e-6
        numeric = (kc.K(3.0 + h) - kc.K(3.0 - h)) / (2 * h)
        self.assertAllClose(kc.dK(3.0), numeric, rtol=1e-8)

    def test_d_n_origin(self):
        """Test case for D, N

        D(0,0) = 1/2, N(0,0) = 1
        """
        self.assertEqual(float(kc.D(0.0, 0.0)), 0.5)
        self.assertEqual(float(kc.N(0.0, 0.0)), 1.0)

    def test_p_pair(self):
        """Test case for P

        P_+(2) = 3 + 2 sqrt(2) and P_+ P_- = 1
        """
        self.assertAllClose(kc.P(2.0, 1), 3.0 + 2.0 * math.sqrt(2.0))
        self.assertAllClose(kc.P(2.0, 1) * kc.P(2.0, -1), 1.0)


class TestConserved(BaseTestCase):
    """KeplerService.conserved"""

    def test_worked_example(self):
        """Test case for conserved

        q=2, x=(1,0,0), v=(0,1,0) -> H=3, L=(0,0,1), R=(2,0,0)
        """
        c = KeplerService.conserved(PhaseState(self.x, self.v), self.params)
        self.assertAllClose(c.H, 3.0)
        self.assertAllClose(c.Lvec, [0.0, 0.0, 1.0])
        self.assertAllClose(c.R, [2.0, 0.0, 0.0])

    def test_zero_velocity(self):
        """Test case for conserved

        q=1, x=(1,0,0), v=0 -> H=1, L=0, R=(0.5,0,0)
        """
        c = KeplerService.conserved(PhaseState([1.0, 0, 0], [0.0, 0, 0]), Params(q=1.0))
        self.assertAllClose(c.H, 1.0)
        self.assertAllClose(c.Lvec, np.zeros(3))
        self.assertAllClose(c.R, [0.5, 0.0, 0.0])

    def test_identities(self):
        """Test case for conserved

        R.L = 0 and (2|R|)^2 = 4 H L^2 + q^2 on random states
        """
        x, v = self.random_states(200)
        H, L, R = kc.conserved_xv(x, v, 2.0)
        self.assertAllClose((R * L).sum(1), 0.0, atol=1e-10)
        self.assertAllClose(4.0 * (R * R).sum(1), 4.0 * H * (L * L).sum(1) + 4.0, rtol=1e-12)

    def test_origin_rejected(self):
        """Test case for conserved

        |x| = 0 is a domain error
        """
        with self.assertRaises(DomainError):
            KeplerService.conserved(PhaseState([0.0, 0, 0], [1.0, 0, 0]), self.params)


class TestAction(BaseTestCase):
    """KeplerService.action"""

    def test_worked_example(self):
        """Test case for action

        q=2, x=(1,0,0), v=(0,1,0) -> a = (sqrt(3)/2, 3/2, 0)
        """
        a = KeplerService.action(PhaseState(self.x, self.v), self.params)
        self.assertAllClose(a, [SQ3 / 2, 1.5, 0.0], atol=1e-15)

    def test_radial(self):
        """Test case for action

        q=1, x=(2,0,0), v=(1,0,0) -> a = (sqrt(3/2), 0, 0)
        """
        a = KeplerService.action(PhaseState([2.0, 0, 0], [1.0, 0, 0]), Params(q=1.0))
        self.assertAllClose(a, [math.sqrt(1.5), 0.0, 0.0], atol=1e-15)

    def test_energy_and_plane(self):
        """Test case for action

        |a|^2 = H and L.a = 0 on random states
        """
        x, v = self.random_states(200)
        H, L, _ = kc.conserved_xv(x, v, 1.0)
        a = kc.action_xv(x, v, 1.0)
        self.assertAllClose((a * a).sum(1), H, rtol=1e-12)
        self.assertAllClose((a * L).sum(1), 0.0, atol=1e-12)

    def test_invariant_along_trajectory(self):
        """Test case for action

        a is constant along an oracle trajectory
        """
        xs, vs = rk_trajectory(self.x, self.v, [0.0, 3.0, 20.0], self.Q_EXAMPLE)
        a = kc.action_xv(xs, vs, self.Q_EXAMPLE)
        self.assertAllClose(a, np.tile(a[0], (3, 1)), rtol=1e-8, atol=1e-10)


class TestRhoOfXa(BaseTestCase):
    """KeplerService.rho_of_xa"""

    def test_examples(self):
        """Test case for rho_of_xa

        perpendicular, anti-parallel and collinear cases
        """
        p = Params(q=1.0)
        self.assertAllClose(KeplerService.rho_of_xa([3.0, 0, 0], [0, 2.0, 0], p), 3.0 * 4.0 / 2.0)
        self.assertAllClose(KeplerService.rho_of_xa([3.0, 0, 0], [-2.0, 0, 0], p), 0.0, atol=1e-15)
        self.assertAllClose(KeplerService.rho_of_xa([4.0, 0, 0], [1.0, 0, 0], p), 4.0)


class TestFoldBranch(BaseTestCase):
    """KeplerService.fold_branch"""

    def test_radial_cases(self):
        """Test case for fold_branch

        radial periapsis on the fold, outgoing +, incoming -
        """
        p = Params(q=1.0)
        self.assertEqual(int(KeplerService.fold_branch(PhaseState([1.0, 0, 0], [0.0, 0, 0]), p)), ON_FOLD)
        self.assertEqual(int(KeplerService.fold_branch(PhaseState([1.0, 0, 0], [0.5, 0, 0]), p)), 1)
        self.assertEqual(int(KeplerService.fold_branch(PhaseState([1.0, 0, 0], [-0.5, 0, 0]), p)), -1)

    def test_fold_state(self):
        """Test case for fold_branch

        the rho = 1 scattering solution lies on the fold
        """
        p = Params(q=1.0)
        v = KeplerService.scattering_solutions([1.0, 0, 0], [0.0, math.sqrt(2.0), 0], p)[0]
        self.assertEqual(int(KeplerService.fold_branch(PhaseState([1.0, 0, 0], v), p)), ON_FOLD)

    def test_tolerance_setting(self):
        """Test case for fold_branch

        KAA_TOL_FOLD widens the on-fold band
        """
        p = Params(q=1.0)
        s = PhaseState([1.0, 0, 0], [1e-6, 0, 0])
        self.assertEqual(int(KeplerService.fold_branch(s, p)), 1)
        settings.update(tol_fold=1e-3)
        self.assertEqual(int(KeplerService.fold_branch(s, p)), ON_FOLD)


class TestGenerating(BaseTestCase):
    """KeplerService.generating"""

    def test_fold_branches_agree(self):
        """Test case for generating

        rho = 1 -> S_+ = S_-
        """
        p = Params(q=1.0)
        x, a = [1.0, 0, 0], [0.0, math.sqrt(2.0), 0]
        self.assertAllClose(KeplerService.rho_of_xa(x, a, p), 1.0)
        self.assertAllClose(KeplerService.generating(x, a, 1, p), KeplerService.generating(x, a, -1, p))

    def test_radial_value(self):
        """Test case for generating

        r=2, a=1, q=1, iota=+ -> K(2) ~ 0.532839
        """
        S = KeplerService.generating([2.0, 0, 0], [1.0, 0, 0], 1, Params(q=1.0))
        self.assertAlmostEqual(float(S), math.sqrt(2.0) - math.log(1.0 + math.sqrt(2.0)), places=12)
        self.assertAlmostEqual(float(S), 0.53284, places=5)

    def test_below_fold_rejected(self):
        """Test case for generating

        rho < 1 is a domain error
        """
        with self.assertRaises(DomainError):
            KeplerService.generating([1.0, 0, 0], [0.0, 1.0, 0], 1, Params(q=1.0))

    def test_gradient_is_scattering_velocity(self):
        """Test case for generating

        central differences of S_iota match the scattering velocity of each branch
        """
        p = Params(q=1.0)
        x0, a = np.array([3.0, 1.0, 0.0]), np.array([1.0, 0.5, 0.0])
        h = 1e-6
        for iota in (1, -1):
            grad = np.array([
                (KeplerService.generating(x0 + h * e, a, iota, p) - KeplerService.generating(x0 - h * e, a, iota, p))
                / (2 * h) for e in np.eye(3)])
            self.assertAllClose(grad, kc.scattering_velocity_xa(x0, a, iota, p.q), rtol=1e-6, atol=1e-8)


class TestAngle(BaseTestCase):
    """KeplerService.angle"""

    def test_worked_example(self):
        """Test case for angle

        closed-form theta of the q=2 periapsis state
        """
        aa = KeplerService.angle(PhaseState(self.x, self.v), self.params)
        expected = [2.0 / 3.0 + (LN2 - 1.0) / 6.0, SQ3 * (LN2 - 1.0) / 6.0, 0.0]
        self.assertAllClose(aa.theta, expected, rtol=1e-12, atol=1e-15)
        self.assertEqual(int(aa.branch), 1)

    def test_angular_momentum(self):
        """Test case for angle

        theta x a = x x v
        """
        x, v = self.random_states(200)
        theta, a = kc.angle_xv(x, v, 1.0)
        self.assertAllClose(np.cross(theta, a), np.cross(x, v), rtol=1e-9, atol=1e-10)

    def test_round_trip(self):
        """Test case for angle

        position/velocity of the SIC image reproduce (x, v)
        """
        p = Params(q=1.0)
        x, v = self.random_states(500)
        c = KeplerService.to_sic(KeplerService.angle(PhaseState(x, v), p), p)
        self.assertAllClose(KeplerService.position(c, p), x, rtol=1e-9, atol=1e-9)
        self.assertAllClose(KeplerService.velocity(c, p), v, rtol=1e-9, atol=1e-9)

    def test_on_fold(self):
        """Test case for angle

        on the fold theta.a = x.v
        """
        p = Params(q=1.0)
        x = np.array([1.0, 0.0, 0.0])
        a = np.array([0.0, math.sqrt(2.0), 0.0])
        v = KeplerService.scattering_solutions(x, a, p)[0]
        aa = KeplerService.angle(PhaseState(x, v), p)
        self.assertAllClose(aa.theta @ aa.a, x @ v, rtol=1e-9)

    def test_radial(self):
        """Test case for angle

        outgoing radial theta = -r_min K(r/r_min) + 2 r v / a
        """
        q, r, vr = 1.0, 2.0, 1.0
        aa = KeplerService.angle(PhaseState([r, 0, 0], [vr, 0, 0]), Params(q=q))
        H = vr * vr + q / r
        r_min = q / H
        expected = -r_min * float(kc.K(r / r_min)) + 2.0 * r * vr / math.sqrt(H)
        self.assertAllClose(aa.theta[0], expected, rtol=1e-10)
        self.assertAllClose(aa.theta[1:], 0.0, atol=1e-15)


class TestRhoSolve(BaseTestCase):
    """KeplerService.rho_solve"""

    def test_tabulated(self):
        """Test case for rho_solve

        fold point, G(2) on the outgoing branch and the kappa=1 incoming case
        """
        self.assertAllClose(KeplerService.rho_solve(-0.49, 0.7, 1), 1.0, atol=1e-12)
        self.assertAllClose(KeplerService.rho_solve(-0.49, 0.7, -1), 1.0, atol=1e-12)
        self.assertAllClose(KeplerService.rho_solve(G2, 0.0, 1), 2.0, rtol=1e-10)
        eta = -(G2 + 3.0 + 2.0 * math.sqrt(2.0))
        self.assertAlmostEqual(eta, -8.1240142, places=6)
        self.assertAllClose(KeplerService.rho_solve(eta, 1.0, -1), 2.0, rtol=1e-10)

    def test_residual(self):
        """Test case for rho_solve

        relation residual below 1e-10 (1 + |eta|) across both branches
        """
        kappa = self.rng.uniform(0.0, 5.0, 2000)
        eta = np.sinh(self.rng.uniform(-15.0, 15.0, 2000))
        iota = np.where(eta + kappa * kappa >= 0, 1, -1)
        rho = KeplerService.rho_solve(eta, kappa, iota)
        self.assertTrue(np.all(rho >= 1.0))
        resid = np.abs(kc.rho_relation_residual(rho, eta, kappa, iota))
        # the relation loses digits through G and P at large rho; sigma form is the sharp one
        sigma = KeplerService.sigma(eta, kappa, iota).sigma
        self.assertTrue(np.all(np.abs(kc.sigma_residual(sigma, eta, kappa)) < 1e-10 * (1.0 + np.abs(eta))))
        small = rho < 1e6
        self.assertTrue(np.all(resid[small] < 1e-8 * (1.0 + np.abs(eta[small]))))

    def test_wrong_branch(self):
        """Test case for rho_solve

        (eta, iota) on the wrong side of the fold raises BranchError
        """
        with self.assertRaises(BranchError):
            KeplerService.rho_solve(1.0, 0.5, -1)
        with self.assertRaises(BranchError):
            KeplerService.rho_solve(-3.0, 0.5, 1)


class TestSigma(BaseTestCase):
    """KeplerService.sigma"""

    def test_examples(self):
        """Test case for sigma

        sigma = 0 on the fold, -ln(1 + sqrt 2) at rho = 2
        """
        self.assertAllClose(KeplerService.sigma(-0.25, 0.5, 1).sigma, 0.0, atol=1e-12)
        rs = KeplerService.sigma(G2, 0.0, 1)
        self.assertAlmostEqual(float(rs.sigma), -0.8813736, places=7)
        self.assertAllClose(rs.rho, 2.0, rtol=1e-10)

    def test_bound(self):
        """Test case for sigma

        |sigma| <= ln(1 + 2 sqrt|eta| + 2 kappa)
        """
        kappa = self.rng.uniform(0.0, 10.0, 5000)
        eta = np.sinh(self.rng.uniform(-12.0, 12.0, 5000))
        sigma = kc.solve_sigma(eta, kappa)
        self.assertTrue(np.all(np.abs(sigma) <= np.log(1.0 + 2.0 * np.sqrt(np.abs(eta)) + 2.0 * kappa) + 1e-12))


class TestSic(BaseTestCase):
    """KeplerService.to_sic / from_sic"""

    def test_collinear(self):
        """Test case for to_sic

        a=(1,0,0), theta=(2,0,0), q=1 -> xi=1, eta=2, L=0, u=(1,0,0)
        """
        c = KeplerService.to_sic(ActionAngle(theta=[2.0, 0, 0], a=[1.0, 0, 0]), Params(q=1.0))
        self.assertAllClose(c.xi, 1.0)
        self.assertAllClose(c.eta, 2.0)
        self.assertAllClose(c.Lvec, np.zeros(3))
        self.assertAllClose(c.u, [1.0, 0, 0])

    def test_round_trip(self):
        """Test case for from_sic

        from_sic(to_sic(theta, a)) = (theta, a); theta is orthogonal to L
        """
        p = Params(q=1.5)
        theta = 5.0 * self.rng.standard_normal((300, 3))
        a = self.rng.standard_normal((300, 3))
        c = KeplerService.to_sic(ActionAngle(theta=theta, a=a), p)
        back = KeplerService.from_sic(c, p)
        self.assertAllClose(back.theta, theta, rtol=1e-12, atol=1e-12)
        self.assertAllClose(back.a, a, rtol=1e-12, atol=1e-14)
        self.assertAllClose((back.theta * c.Lvec).sum(1), 0.0, atol=1e-10)

    def test_zero_action_rejected(self):
        """Test case for to_sic

        |a| = 0 is a domain error
        """
        with self.assertRaises(DomainError):
            KeplerService.to_sic(ActionAngle(theta=[1.0, 0, 0], a=[0.0, 0, 0]), self.params)


class TestPosition(BaseTestCase):
    """KeplerService.position / velocity"""

    def test_radial_periapsis(self):
        """Test case for position

        kappa=0, eta=0 -> |X| = q/a^2 and V = 0
        """
        p = Params(q=1.0)
        c = SICCoords(xi=1.0, eta=0.0, Lvec=[0.0, 0, 0], u=[1.0, 0, 0])
        self.assertAllClose(KeplerService.position(c, p), [1.0, 0, 0])
        self.assertAllClose(KeplerService.velocity(c, p), np.zeros(3), atol=1e-15)

    def test_conserved_reproduced(self):
        """Test case for velocity

        conserved(position, velocity) gives H = q^2/xi^2 and |L| = lambda
        """
        q = 1.0
        xi, eta, L, u = random_sic(self.rng, 300, q)
        X, V = kc.xv_from_sic(xi, eta, L, u, q)
        H, Lv, _ = kc.conserved_xv(X, V, q)
        self.assertAllClose(H, q * q / (xi * xi), rtol=1e-9)
        self.assertAllClose(np.linalg.norm(Lv, axis=1), np.linalg.norm(L, axis=1), rtol=1e-9, atol=1e-12)


class TestLinearFlow(BaseTestCase):
    """KeplerService.linear_flow"""

    def test_identity_and_group_law(self):
        """Test case for linear_flow

        t=0 is the identity and flow(t) flow(s) = flow(t+s)
        """
        aa = ActionAngle(theta=[1.0, 2.0, 3.0], a=[0.5, -1.0, 0.2])
        self.assertAllClose(KeplerService.linear_flow(aa, 0.0).theta, aa.theta)
        two = KeplerService.linear_flow(KeplerService.linear_flow(aa, 1.5), 2.5)
        self.assertAllClose(two.theta, KeplerService.linear_flow(aa, 4.0).theta)

    def test_only_eta_moves(self):
        """Test case for linear_flow

        in SIC only eta changes, by t q^2 / xi^3
        """
        p = Params(q=2.0)
        aa = KeplerService.angle(PhaseState(self.x, self.v), p)
        before = KeplerService.to_sic(aa, p)
        after = KeplerService.to_sic(KeplerService.linear_flow(aa, 7.0), p)
        self.assertAllClose(after.xi, before.xi)
        self.assertAllClose(after.Lvec, before.Lvec, atol=1e-12)
        self.assertAllClose(after.u, before.u)
        self.assertAllClose(after.eta, before.eta + 7.0 * p.q ** 2 / before.xi ** 3, rtol=1e-12)


class TestKeplerPropagate(BaseTestCase):
    """KeplerService.kepler_propagate"""

    def test_identity(self):
        """Test case for kepler_propagate

        t=0 returns the state
        """
        s = KeplerService.kepler_propagate(PhaseState(self.x, self.v), 0.0, self.params)
        self.assertAllClose(s.x, self.x, atol=1e-14)
        self.assertAllClose(s.v, self.v, atol=1e-14)

    def test_oracle_t100(self):
        """Test case for kepler_propagate

        worked example at t=100 agrees with the RK oracle to 1e-6 relative
        """
        s = PhaseState(self.x, self.v)
        exact = KeplerService.kepler_propagate(s, 100.0, self.params)
        truth = rk_oracle(s, 100.0, self.params)
        self.assertLess(np.linalg.norm(exact.x - truth.x) / np.linalg.norm(truth.x), 1e-6)

    def test_conservation_and_reversal(self):
        """Test case for kepler_propagate

        H and L conserved; flow(-t) after flow(t) is the identity
        """
        p = Params(q=1.0)
        x, v = self.random_states(100)
        s = PhaseState(x, v)
        moved = KeplerService.kepler_propagate(s, 30.0, p)
        H0, L0, _ = kc.conserved_xv(x, v, p.q)
        H1, L1, _ = kc.conserved_xv(moved.x, moved.v, p.q)
        self.assertAllClose(H1, H0, rtol=1e-10)
        self.assertAllClose(L1, L0, rtol=1e-9, atol=1e-9)
        back = KeplerService.kepler_propagate(moved, -30.0, p)
        self.assertAllClose(back.x, x, rtol=1e-8, atol=1e-8)

    def test_velocity_approaches_action(self):
        """Test case for kepler_propagate

        |v(t) - a| decays like 1/t
        """
        s = PhaseState(self.x, self.v)
        a = KeplerService.action(s, self.params)
        gaps = [t * np.linalg.norm(KeplerService.kepler_propagate(s, t, self.params).v - a)
                for t in (1e3, 1e4, 1e5)]
        self.assertLess(max(gaps) / min(gaps), 2.0)


class TestPeriapsis(BaseTestCase):
    """KeplerService.periapsis"""

    def test_worked_example_at_periapsis(self):
        """Test case for periapsis

        x.v = 0 already, so t_p = 0 and the state is unchanged
        """
        t_p, s_p = KeplerService.periapsis(PhaseState(self.x, self.v), self.params)
        self.assertAllClose(t_p, 0.0, atol=1e-12)
        self.assertAllClose(s_p.x, self.x, atol=1e-12)

    def test_rho_at_periapsis(self):
        """Test case for rho_solve

        at eta_p = ln(5)/4, kappa = 1 the solution satisfies eta - G(rho) + P_-(rho) = 0
        """
        eta_p = 0.25 * math.log(5.0)
        rho = KeplerService.rho_solve(eta_p, 1.0, 1)
        self.assertAllClose(kc.rho_relation_residual(rho, eta_p, 1.0, 1), 0.0, atol=1e-12)
        self.assertAllClose(rho, 1.1708203932, rtol=1e-9)

    def test_rho_solve_inverts_relation(self):
        """Test case for rho_solve

        eta built from a chosen rho by forward evaluation of G and P gives that rho back
        """
        for rho in (1.0 + 1e-6, 1.5, 3.0, 1e4):
            for kappa in (0.1, 1.0, 4.0):
                eta = float(kc.G(rho) - kappa * kappa * kc.P(rho, -1))
                self.assertAllClose(KeplerService.rho_solve(eta, kappa, 1), rho, rtol=1e-9)

    def test_random_states(self):
        """Test case for periapsis

        x.v vanishes at the periapsis state, reached by the flow after t_p
        """
        p = Params(q=1.0)
        x, v = self.random_states(50)
        t_p, s_p = KeplerService.periapsis(PhaseState(x, v), p)
        scale = np.linalg.norm(s_p.x, axis=1) * np.linalg.norm(s_p.v, axis=1)
        self.assertTrue(np.all(np.abs((s_p.x * s_p.v).sum(1)) < 1e-9 * scale))
        reached = KeplerService.kepler_propagate(PhaseState(x, v), t_p, p)
        self.assertAllClose(reached.x, s_p.x, rtol=1e-8, atol=1e-8)

    def test_oracle_minimum(self):
        """Test case for periapsis

        the oracle trajectory has its minimum distance at t_p
        """
        p = Params(q=1.0)
        x, v = np.array([-4.0, 1.0, 0.5]), np.array([0.8, 0.1, 0.0])
        t_p, s_p = KeplerService.periapsis(PhaseState(x, v), p)
        times = t_p + np.linspace(-1e-3, 1e-3, 5)
        xs, _ = rk_trajectory(x, v, times, p.q)
        r = np.linalg.norm(xs, axis=1)
        self.assertEqual(int(np.argmin(r)), 2)
        self.assertAllClose(r[2], np.linalg.norm(s_p.x), rtol=1e-8)


class TestPastCoords(BaseTestCase):
    """KeplerService.past_coords / time_reversed / past_action"""

    def test_worked_example(self):
        """Test case for past_coords

        xi^- = -xi, eta^- = eta at periapsis, u^- mirrored in the periapsis axis
        """
        c = KeplerService.to_sic(KeplerService.angle(PhaseState(self.x, self.v), self.params), self.params)
        past = KeplerService.past_coords(c)
        self.assertAllClose(past.xi, -2.0 / SQ3)
        self.assertAllClose(past.eta, LN2 / 2.0)
        self.assertAllClose(past.u, [0.5, -SQ3 / 2.0, 0.0], atol=1e-15)
        self.assertAllClose(past.Lvec, c.Lvec)

    def test_radial_reflection(self):
        """Test case for past_coords

        kappa=0 -> eta^- = -eta and u^- = u
        """
        c = SICCoords(xi=1.0, eta=1.7, Lvec=[0.0, 0, 0], u=[0.0, 1.0, 0])
        past = KeplerService.past_coords(c)
        self.assertAllClose(past.eta, -1.7)
        self.assertAllClose(past.u, c.u)

    def test_unit_and_same_state(self):
        """Test case for past_coords

        |u^-| = 1; the past chart gives the same (X, V), the reversed chart gives (X, -V)
        """
        p = Params(q=1.0)
        xi, eta, L, u = random_sic(self.rng, 200, p.q)
        c = SICCoords(xi=xi, eta=eta, Lvec=L, u=u)
        past = KeplerService.past_coords(c)
        self.assertAllClose(np.linalg.norm(past.u, axis=1), 1.0, rtol=1e-12)
        X, V = kc.xv_from_sic(xi, eta, L, u, p.q)
        self.assertAllClose(KeplerService.position(past, p), X, rtol=1e-9, atol=1e-9)
        self.assertAllClose(KeplerService.velocity(past, p), V, rtol=1e-9, atol=1e-9)
        reversed_chart = KeplerService.time_reversed(past)
        self.assertAllClose(KeplerService.position(reversed_chart, p), X, rtol=1e-9, atol=1e-9)
        self.assertAllClose(KeplerService.velocity(reversed_chart, p), -V, rtol=1e-9, atol=1e-9)

    def test_involution(self):
        """Test case for past_coords

        applying the transition twice restores the coordinates
        """
        xi, eta, L, u = random_sic(self.rng, 100)
        c = SICCoords(xi=xi, eta=eta, Lvec=L, u=u)
        twice = KeplerService.past_coords(KeplerService.past_coords(c))
        self.assertAllClose(twice.xi, xi)
        self.assertAllClose(twice.eta, eta, rtol=1e-12, atol=1e-12)
        self.assertAllClose(twice.u, u, rtol=1e-12, atol=1e-12)

    def test_past_action(self):
        """Test case for past_action

        worked example a^- = (-sqrt(3)/2, 3/2, 0), the velocity long before periapsis
        """
        s = PhaseState(self.x, self.v)
        a_past = KeplerService.past_action(s, self.params)
        self.assertAllClose(a_past, [-SQ3 / 2, 1.5, 0.0], atol=1e-14)
        _, vs = rk_trajectory(self.x, self.v, [-1000.0], self.Q_EXAMPLE)
        self.assertLess(np.linalg.norm(vs[0] - a_past), 5e-3)


class TestScatteringSolutions(BaseTestCase):
    """KeplerService.scattering_solutions"""

    def test_no_solution(self):
        """Test case for scattering_solutions

        rho = 0.5 -> empty
        """
        self.assertEqual(KeplerService.scattering_solutions([1.0, 0, 0], [0.0, 1.0, 0], Params(q=1.0)), [])

    def test_radial(self):
        """Test case for scattering_solutions

        collinear outgoing: v = +/- sqrt(|a|^2 - q/r) x
        """
        sols = KeplerService.scattering_solutions([2.0, 0, 0], [1.0, 0, 0], Params(q=1.0))
        speeds = sorted(float(v[0]) for v in sols)
        self.assertAllClose(speeds, [-math.sqrt(0.5), math.sqrt(0.5)])

    def test_fold_single(self):
        """Test case for scattering_solutions

        rho = 1 -> one velocity with x.v = -sqrt(H) L^2 / q
        """
        p = Params(q=1.0)
        x0 = np.array([1.0, 0, 0])
        sols = KeplerService.scattering_solutions(x0, [0.0, math.sqrt(2.0), 0], p)
        self.assertEqual(len(sols), 1)
        H, L, _ = kc.conserved_xv(x0, sols[0], p.q)
        self.assertAllClose(x0 @ sols[0], -math.sqrt(H) * (L @ L) / p.q)

    def test_two_branches(self):
        """Test case for scattering_solutions

        both solutions have asymptotic velocity a, ordered by |L|
        """
        p = Params(q=1.0)
        x0, a = np.array([3.0, 1.0, 0.0]), np.array([1.0, 0.5, 0.0])
        sols = KeplerService.scattering_solutions(x0, a, p)
        self.assertEqual(len(sols), 2)
        lams = [np.linalg.norm(np.cross(x0, v)) for v in sols]
        self.assertLess(lams[0], lams[1])
        for v in sols:
            self.assertAllClose(kc.action_xv(x0, v, p.q), a, rtol=1e-9, atol=1e-12)


if __name__ == '__main__':
    unittest.main()
