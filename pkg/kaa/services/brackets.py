"""
Finite-difference Poisson brackets {f, g} = grad_x f . grad_v g - grad_v f . grad_x g
and the bracket tables of the super-integrable coordinates.
"""

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from kaa.exceptions import StepUnderflowError
from kaa.models.report import BracketReport
from kaa.services import kepler_core as kc

DEFAULT_STEP = 1e-5
TABLE_TOLERANCE = 1e-5
_MIN_STEP = 1e3 * np.finfo(float).eps

_LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI_CIVITA[_i, _j, _k] = 1.0
    _LEVI_CIVITA[_i, _k, _j] = -1.0


@dataclass(frozen=True)
class ScalarField:
    """A phase-space function f(x, v) -> float with a label"""

    label: str
    evaluation: Callable[[np.ndarray, np.ndarray], float]

    def __call__(self, x, v):
        return float(self.evaluation(np.asarray(x, dtype=float), np.asarray(v, dtype=float)))


def gradient(f: ScalarField, x, v, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference gradient in z = (x, v), step h (1 + |z_k|) per component"""
    if not h >= _MIN_STEP:
        raise StepUnderflowError(f"Finite-difference step {h!r} is below the rounding scale",
                                 step=h)
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(v, dtype=float)])
    steps = h * (1.0 + np.abs(z))
    grad = np.empty(6)
    for k in range(6):
        zp, zm = z.copy(), z.copy()
        zp[k] += steps[k]
        zm[k] -= steps[k]
        grad[k] = (f(zp[:3], zp[3:]) - f(zm[:3], zm[3:])) / (zp[k] - zm[k])
    return grad


def bracket_from_gradients(gf, gg) -> float:
    return float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3])


class BracketService:
    """Numerical Poisson brackets"""

    @staticmethod
    def pb_numeric(f: ScalarField, g: ScalarField, x, v, h: float = DEFAULT_STEP) -> float:
        return bracket_from_gradients(gradient(f, x, v, h), gradient(g, x, v, h))

    @staticmethod
    def jacobi_residual(f: ScalarField, g: ScalarField, k: ScalarField, x, v, h: float = 1e-4) -> float:
        """|{f,{g,k}} + {g,{k,f}} + {k,{f,g}}| with inner step h and outer step sqrt(h)"""
        outer = np.sqrt(h)

        def nested(a, b):
            return ScalarField(f"{{{a.label},{b.label}}}",
                               lambda xx, vv: BracketService.pb_numeric(a, b, xx, vv, h))

        total = (BracketService.pb_numeric(f, nested(g, k), x, v, outer)
                 + BracketService.pb_numeric(g, nested(k, f), x, v, outer)
                 + BracketService.pb_numeric(k, nested(f, g), x, v, outer))
        return abs(total)

    @staticmethod
    def check_sic_table(x, v, q: float, past: bool = False, h: float = DEFAULT_STEP,
                        tolerance: float = TABLE_TOLERANCE) -> BracketReport:
        """Residuals of the SIC bracket table (or its past-coordinate analogue)"""
        fields = sic_fields(q, past=past)
        grads = {name: gradient(f, x, v, h) for name, f in fields.items()}

        def pb(a, b):
            return bracket_from_gradients(grads[a], grads[b])

        u = np.array([fields[f'u{k}'](x, v) for k in range(3)])
        L = np.array([fields[f'L{k}'](x, v) for k in range(3)])
        lam = np.linalg.norm(L)

        relations = {'{xi,eta}': (pb('xi', 'eta'), 1.0),
                     '{xi,lambda}': (pb('xi', 'lambda'), 0.0),
                     '{eta,lambda}': (pb('eta', 'lambda'), 0.0)}
        for k in range(3):
            relations[f'{{xi,u{k}}}'] = (pb('xi', f'u{k}'), 0.0)
            relations[f'{{eta,u{k}}}'] = (pb('eta', f'u{k}'), 0.0)
            relations[f'{{xi,L{k}}}'] = (pb('xi', f'L{k}'), 0.0)
            relations[f'{{eta,L{k}}}'] = (pb('eta', f'L{k}'), 0.0)
            relations[f'{{lambda,L{k}}}'] = (pb('lambda', f'L{k}'), 0.0)
            for j in range(3):
                relations[f'{{L{j},u{k}}}'] = (pb(f'L{j}', f'u{k}'), _LEVI_CIVITA[j, k] @ u)
                relations[f'{{L{j},L{k}}}'] = (pb(f'L{j}', f'L{k}'), _LEVI_CIVITA[j, k] @ L)
                if j < k:
                    relations[f'{{u{j},u{k}}}'] = (pb(f'u{j}', f'u{k}'), 0.0)

        skipped = []
        lxu = np.cross(L / lam, u) if lam > 0 else None
        for k in range(3):
            name = f'{{lambda,u{k}}}'
            if lxu is None:
                skipped.append(name)
                continue
            # u^- is u rotated about L, so the past table keeps the same sign
            relations[name] = (pb('lambda', f'u{k}'), -lxu[k])
        if lam == 0:
            skipped.append('{lambda,*}')
            relations = {k: r for k, r in relations.items() if 'lambda' not in k}

        residuals = {name: abs(num - exact) / (1.0 + abs(exact)) for name, (num, exact) in relations.items()}
        return BracketReport(label='sic_past' if past else 'sic', residuals=residuals,
                             tolerance=tolerance, skipped=skipped)

    @staticmethod
    def check_xv_brackets(x, v, t: float, q: float, h: float = DEFAULT_STEP,
                          tolerance: float = TABLE_TOLERANCE) -> BracketReport:
        """Brackets of (a, xi, lambda) with the propagated position and velocity"""
        fields = xv_fields(q, t)
        names = ['a', 'xi', 'lambda'] + [f'X{k}' for k in range(3)] + [f'V{k}' for k in range(3)]
        grads = {name: gradient(fields[name], x, v, h) for name in names}
        Xt, Vt = kc.propagate_xv(np.asarray(x, dtype=float), np.asarray(v, dtype=float), t, q)
        a = np.sqrt(kc.conserved_xv(x, v, q)[0])
        xi = q / a
        L = np.cross(x, v)
        lam = np.linalg.norm(L)
        r3 = np.linalg.norm(Xt) ** 3

        exact = {
            'a,X': -Vt / a,
            'xi,X': xi * xi / q * Vt / a,
            'a,V': -0.5 * xi * Xt / r3,
            'xi,V': xi ** 3 / (2.0 * q) * Xt / r3,
        }
        skipped = []
        if lam > 0:
            exact['lambda,X'] = -np.cross(L / lam, Xt)
            exact['lambda,V'] = -np.cross(L / lam, Vt)
        else:
            skipped += ['lambda,X', 'lambda,V']

        residuals = {}
        for key, target in exact.items():
            left, right = key.split(',')
            for k in range(3):
                num = bracket_from_gradients(grads[left], grads[f'{right}{k}'])
                residuals[f'{{{left},{right}{k}}}'] = abs(num - target[k]) / (1.0 + abs(target[k]))
        return BracketReport(label=f'xv(t={t:g})', residuals=residuals, tolerance=tolerance,
                             skipped=skipped)

    @staticmethod
    def check_canonical(x, v, q: float, h: float = DEFAULT_STEP,
                        tolerance: float = TABLE_TOLERANCE) -> BracketReport:
        """{theta^j, a^k} = delta_jk, {theta^j, theta^k} = {a^j, a^k} = 0 and {H, L^j} = 0"""
        fields = aa_fields(q)
        grads = {name: gradient(f, x, v, h) for name, f in fields.items()}
        residuals = {}
        for j in range(3):
            residuals[f'{{H,L{j}}}'] = abs(bracket_from_gradients(grads['H'], grads[f'L{j}']))
            for k in range(3):
                exact = 1.0 if j == k else 0.0
                residuals[f'{{theta{j},a{k}}}'] = abs(
                    bracket_from_gradients(grads[f'theta{j}'], grads[f'a{k}']) - exact)
                if j < k:
                    residuals[f'{{theta{j},theta{k}}}'] = abs(
                        bracket_from_gradients(grads[f'theta{j}'], grads[f'theta{k}']))
                    residuals[f'{{a{j},a{k}}}'] = abs(bracket_from_gradients(grads[f'a{j}'], grads[f'a{k}']))
        return BracketReport(label='canonical', residuals=residuals, tolerance=tolerance)

    @staticmethod
    def check_chart_invariance(x, v, q: float, h: float = DEFAULT_STEP,
                               tolerance: float = 1e-4) -> BracketReport:
        """Brackets of phase-space functions differenced in (x, v) and in (theta, a)"""
        fields = dict(canonical_fields())
        fields['x.v'] = ScalarField('x.v', lambda xx, vv: xx @ vv)
        fields['H'] = ScalarField('H', lambda xx, vv: kc.conserved_xv(xx, vv, q)[0])
        theta, a = kc.angle_xv(np.asarray(x, dtype=float), np.asarray(v, dtype=float), q)

        def pulled_back(f):
            return ScalarField(f.label, lambda th, aa: f(*kc.xv_from_sic(*kc.sic_from_aa(th, aa, q), q)))

        g_xv = {name: gradient(f, x, v, h) for name, f in fields.items()}
        g_aa = {name: gradient(pulled_back(f), theta, a, h) for name, f in fields.items()}
        names = sorted(fields)
        residuals = {}
        for i, left in enumerate(names):
            for right in names[i + 1:]:
                in_xv = bracket_from_gradients(g_xv[left], g_xv[right])
                in_aa = bracket_from_gradients(g_aa[left], g_aa[right])
                residuals[f'{{{left},{right}}}'] = abs(in_xv - in_aa) / (1.0 + abs(in_xv))
        return BracketReport(label='chart', residuals=residuals, tolerance=tolerance)

    @staticmethod
    def check_transition_brackets(x, v, q: float, h: float = DEFAULT_STEP,
                                  tolerance: float = TABLE_TOLERANCE) -> BracketReport:
        """Brackets of past coordinates expressed through future ones, for a few test functions"""
        future = sic_fields(q)
        past = sic_fields(q, past=True)
        zetas = {
            'x0': ScalarField('x0', lambda xx, vv: xx[0]),
            'v1': ScalarField('v1', lambda xx, vv: vv[1]),
            'H': ScalarField('H', lambda xx, vv: kc.conserved_xv(xx, vv, q)[0]),
        }
        gf = {name: gradient(f, x, v, h) for name, f in future.items()}
        gp = {name: gradient(f, x, v, h) for name, f in past.items()}

        xi = future['xi'](x, v)
        L = np.array([future[f'L{k}'](x, v) for k in range(3)])
        u = np.array([future[f'u{k}'](x, v) for k in range(3)])
        lam = np.linalg.norm(L)
        kappa = lam / xi
        s = 1.0 + 4.0 * kappa * kappa
        lxu = np.cross(L / lam, u) if lam > 0 else np.zeros(3)

        residuals = {}
        for zname, zeta in zetas.items():
            gz = gradient(zeta, x, v, h)

            def pbf(name):
                return bracket_from_gradients(gf[name], gz)

            pairs = {
                'xi': (bracket_from_gradients(gp['xi'], gz), -pbf('xi')),
                'eta': (bracket_from_gradients(gp['eta'], gz),
                        -4.0 * kappa * kappa / (xi * s) * pbf('xi') - pbf('eta')
                        + 4.0 * kappa / (xi * s) * pbf('lambda')),
                'lambda': (bracket_from_gradients(gp['lambda'], gz), pbf('lambda')),
            }
            pb_u = np.array([pbf(f'u{k}') for k in range(3)])
            # {L x u, zeta} by the product rule
            pb_L = np.array([pbf(f'L{k}') for k in range(3)])
            pb_Lxu = np.cross(pb_L, u) + np.cross(L, pb_u)
            expected_u = ((16.0 * kappa ** 2 * u + 4.0 * kappa * (1.0 - 4.0 * kappa ** 2) * lxu)
                          / (xi * s * s) * pbf('xi')
                          + (-16.0 * kappa * u + 32.0 * kappa ** 2 * lxu) / (xi * s * s) * pbf('lambda')
                          + (1.0 - 4.0 * kappa ** 2) / s * pb_u - 4.0 / (xi * s) * pb_Lxu)
            for k in range(3):
                pairs[f'u{k}'] = (bracket_from_gradients(gp[f'u{k}'], gz), expected_u[k])
                pairs[f'L{k}'] = (bracket_from_gradients(gp[f'L{k}'], gz), pbf(f'L{k}'))
            for name, (num, exact) in pairs.items():
                residuals[f'{{{name}^-,{zname}}}'] = abs(num - exact) / (1.0 + abs(exact))
        return BracketReport(label='transition', residuals=residuals, tolerance=tolerance)


# ---------------------------------------------------------------------------
# coordinate functions as ScalarFields

def _sic_of(x, v, q, past):
    theta, a = kc.angle_xv(x, v, q)
    xi, eta, L, u = kc.sic_from_aa(theta, a, q)
    if past:
        xi, eta, L, u = kc.past_sic(xi, eta, L, u)
    return xi, eta, L, u


def sic_fields(q: float, past: bool = False) -> Dict[str, ScalarField]:
    suffix = '^-' if past else ''
    fields = {
        'xi': ScalarField('xi' + suffix, lambda x, v: _sic_of(x, v, q, past)[0]),
        'eta': ScalarField('eta' + suffix, lambda x, v: _sic_of(x, v, q, past)[1]),
        'lambda': ScalarField('lambda' + suffix, lambda x, v: np.linalg.norm(np.cross(x, v))),
    }
    for k in range(3):
        fields[f'u{k}'] = ScalarField(f'u{k}{suffix}', lambda x, v, k=k: _sic_of(x, v, q, past)[3][k])
        fields[f'L{k}'] = ScalarField(f'L{k}{suffix}', lambda x, v, k=k: np.cross(x, v)[k])
    return fields


def aa_fields(q: float) -> Dict[str, ScalarField]:
    fields = {'H': ScalarField('H', lambda x, v: kc.conserved_xv(x, v, q)[0])}
    for k in range(3):
        fields[f'theta{k}'] = ScalarField(f'theta{k}', lambda x, v, k=k: kc.angle_xv(x, v, q)[0][k])
        fields[f'a{k}'] = ScalarField(f'a{k}', lambda x, v, k=k: kc.action_xv(x, v, q)[k])
        fields[f'L{k}'] = ScalarField(f'L{k}', lambda x, v, k=k: np.cross(x, v)[k])
    return fields


def xv_fields(q: float, t: float) -> Dict[str, ScalarField]:
    fields = {
        'a': ScalarField('a', lambda x, v: np.sqrt(kc.conserved_xv(x, v, q)[0])),
        'xi': ScalarField('xi', lambda x, v: q / np.sqrt(kc.conserved_xv(x, v, q)[0])),
        'lambda': ScalarField('lambda', lambda x, v: np.linalg.norm(np.cross(x, v))),
    }
    for k in range(3):
        fields[f'X{k}'] = ScalarField(f'X{k}', lambda x, v, k=k: kc.propagate_xv(x, v, t, q)[0][k])
        fields[f'V{k}'] = ScalarField(f'V{k}', lambda x, v, k=k: kc.propagate_xv(x, v, t, q)[1][k])
    return fields


def canonical_fields() -> Dict[str, ScalarField]:
    """Coordinate functions x^k, v^k"""
    fields = {}
    for k in range(3):
        fields[f'x{k}'] = ScalarField(f'x{k}', lambda x, v, k=k: x[k])
        fields[f'v{k}'] = ScalarField(f'v{k}', lambda x, v, k=k: v[k])
    return fields
