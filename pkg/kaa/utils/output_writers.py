"""
Run artifacts: CSV tables, summary JSON and a gnuplot script over the CSVs
"""

import json
import os

import numpy as np

from kaa.models.charge import ChargeState, DiagnosticsRecord
from kaa.models.ensemble import FieldSample, ParticleEnsemble
from kaa.utils.logger import get_logger
from kaa.utils.response_helpers import to_jsonable

logger = get_logger('kaa.output')

PARTICLE_COLUMNS = ('t', 'id', 'x', 'y', 'z', 'vx', 'vy', 'vz',
                    'theta_x', 'theta_y', 'theta_z', 'a_x', 'a_y', 'a_z', 'gamma')
PROFILE_COLUMNS = ('t', 'r', 'y_x', 'y_y', 'y_z', 'psi', 'E_x', 'E_y', 'E_z')


def _write_table(path, columns, rows):
    rows = np.asarray(rows, dtype=float).reshape(-1, len(columns))
    np.savetxt(path, rows, delimiter=',', header=','.join(columns), comments='', fmt='%.17g')
    logger.debug(f"wrote {rows.shape[0]} rows to {path}")
    return path


def write_particles(path, ens: ParticleEnsemble, charge: ChargeState):
    """Absolute states (relative + charge) with actions and sampling weights"""
    n = ens.n
    rows = np.column_stack([
        np.full(n, ens.t), np.arange(n),
        ens.x + charge.X, ens.v + charge.V,
        ens.theta, ens.a, ens.gamma,
    ])
    return _write_table(path, PARTICLE_COLUMNS, rows)


def write_diagnostics(path, records):
    columns = DiagnosticsRecord.columns()
    return _write_table(path, columns, [r.row() for r in records])


def write_field_profile(path, t: float, radii, sample: FieldSample):
    rows = np.column_stack([np.full(len(radii), t), radii, sample.y, sample.psi, sample.E])
    return _write_table(path, PROFILE_COLUMNS, rows)


def write_json(path, payload):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(payload), f, indent=2, ensure_ascii=False)
    return path


def write_plot_script(path, diagnostics='diagnostics.csv', profile=None):
    """gnuplot script over the CSV outputs; columns are addressed by header name"""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        "",
        "set output 'field_decay.png'",
        "set logscale xy",
        "set xlabel 't'",
        f"plot '{diagnostics}' using 't':'supE' with lines, \\",
        f"     '{diagnostics}' using 't':'supE_proxy' with lines",
        "",
        "set output 'moments.png'",
        "set logscale x",
        "unset logscale y",
        f"plot for [col in 'a_sup xi_sup lambda_sup eta_sup'] '{diagnostics}' using 't':col with lines",
        "",
        "set output 'charge_velocity.png'",
        "unset logscale",
        f"plot for [col in 'Vc_x Vc_y Vc_z'] '{diagnostics}' using 't':col with lines",
    ]
    if profile:
        lines += [
            "",
            "set output 'field_profile.png'",
            "set logscale xy",
            "set xlabel 'r'",
            f"plot '{profile}' using 'r':(sqrt(column('E_x')**2 + column('E_y')**2 + column('E_z')**2)) "
            "with points title '|E|'",
        ]
    with open(path, 'w', encoding='utf-8') as f:
        f.write("\n".join(lines) + "\n")
    return path


class RunWriter:
    """Writes the artifacts of one command into an output directory"""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.written = []

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _track(self, path):
        self.written.append(os.path.basename(path))
        return path

    def particles(self, ens, charge):
        return self._track(write_particles(self.path('particles.csv'), ens, charge))

    def diagnostics(self, records):
        return self._track(write_diagnostics(self.path('diagnostics.csv'), records))

    def field_profile(self, t, radii, sample):
        return self._track(write_field_profile(self.path('field_profile.csv'), t, radii, sample))

    def summary(self, payload):
        return self._track(write_json(self.path('summary.json'), payload))

    def plot_script(self, with_profile: bool = False):
        return self._track(write_plot_script(self.path('plot.gp'),
                                             profile='field_profile.csv' if with_profile else None))
