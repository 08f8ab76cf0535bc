"""
Coordinate commands: transform, flow, scatter
"""
import numpy as np

from kaa.models.params import Params
from kaa.models.phase import PhaseState
from kaa.services import kepler_core as kc
from kaa.services.kepler_core import KeplerService
from kaa.services.oracle import rk_oracle
from kaa.utils.response_helpers import handle_service_error, success_response


def _params(args) -> Params:
    return Params(q=args.q)


def coordinates_payload(s: PhaseState, p: Params) -> dict:
    """Every coordinate of one state: conserved set, (theta, a), SIC, rho/sigma and branch"""
    conserved = KeplerService.conserved(s, p)
    aa = KeplerService.angle(s, p)
    sic = KeplerService.to_sic(aa, p)
    sigma = kc.sigma_xv(s.x, s.v, p.q)
    return {
        'x': s.x,
        'v': s.v,
        'H': conserved.H,
        'L': conserved.Lvec,
        'R': conserved.R,
        'theta': aa.theta,
        'a': aa.a,
        'xi': sic.xi,
        'eta': sic.eta,
        'lambda': sic.lam,
        'kappa': sic.kappa,
        'u': sic.u,
        'rho': np.cosh(sigma) ** 2,
        'sigma': sigma,
        'iota': aa.branch,
        'past_action': KeplerService.past_action(s, p),
    }


@handle_service_error
def transform(args):
    """(x, v) -> all coordinates, or (theta, a) -> (x, v) with --inverse"""
    p = _params(args)
    if args.inverse:
        theta, a = args.theta, args.a
        xi, eta, L, u = kc.sic_from_aa(theta, a, p.q)
        x, v = kc.xv_from_sic(xi, eta, L, u, p.q)
        return success_response({'theta': theta, 'a': a, 'x': x, 'v': v})
    return success_response(coordinates_payload(PhaseState(x=args.x, v=args.v), p))


@handle_service_error
def flow(args):
    """Exact Kepler flow to time t, optionally compared with the Runge-Kutta oracle"""
    p = _params(args)
    s = PhaseState(x=args.x, v=args.v)
    moved = KeplerService.kepler_propagate(s, args.t, p)
    payload = {'t': args.t, 'x': moved.x, 'v': moved.v}
    if args.oracle:
        reference = rk_oracle(s, args.t, p)
        payload['oracle'] = {
            'x': reference.x,
            'v': reference.v,
            'rel_error_x': float(np.linalg.norm(moved.x - reference.x) / np.linalg.norm(reference.x)),
        }
    return success_response(payload)


@handle_service_error
def scatter(args):
    """Orbits through x0 with asymptotic velocity a: 0, 1 (on the fold) or 2 solutions"""
    p = _params(args)
    x0 = np.asarray(args.x0, dtype=float)
    solutions = KeplerService.scattering_solutions(x0, args.a, p)
    return success_response({
        'x0': x0,
        'a': args.a,
        'rho': KeplerService.rho_of_xa(x0, args.a, p),
        'count': len(solutions),
        'solutions': [
            {
                'v': v,
                'iota': int(KeplerService.fold_branch(PhaseState(x=x0, v=v), p)),
                'L': np.cross(x0, v),
            }
            for v in solutions
        ],
    })


def register(subparsers, vector):
    """Attach the coordinate commands to the CLI"""
    parser = subparsers.add_parser('transform', help='Physical state to asymptotic coordinates')
    parser.add_argument('--x', type=vector, help='position, e.g. 1,0,0')
    parser.add_argument('--v', type=vector, help='velocity')
    parser.add_argument('--q', type=float, default=1.0)
    parser.add_argument('--inverse', action='store_true', help='read --theta/--a and print (x, v)')
    parser.add_argument('--theta', type=vector)
    parser.add_argument('--a', type=vector)
    parser.set_defaults(handler=transform, required_vectors=lambda a: ('theta', 'a') if a.inverse else ('x', 'v'))

    parser = subparsers.add_parser('flow', help='Exact Kepler flow')
    parser.add_argument('--x', type=vector)
    parser.add_argument('--v', type=vector)
    parser.add_argument('--q', type=float, default=1.0)
    parser.add_argument('--t', type=float, required=True)
    parser.add_argument('--oracle', action='store_true', help='also integrate with the RK oracle')
    parser.set_defaults(handler=flow, required_vectors=lambda a: ('x', 'v'))

    parser = subparsers.add_parser('scatter', help='Orbits through x0 with asymptotic velocity a')
    parser.add_argument('--x0', type=vector)
    parser.add_argument('--a', type=vector)
    parser.add_argument('--q', type=float, default=1.0)
    parser.set_defaults(handler=scatter, required_vectors=lambda a: ('x0', 'a'))
