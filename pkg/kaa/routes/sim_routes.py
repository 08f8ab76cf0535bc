"""
Simulation commands: simulate, field-profile
"""
import json

import numpy as np

from kaa.exceptions import (ConfigError, IllConditionedWindowError, SimulationError,
                            WindowTooShortError)
from kaa.models.charge import SimConfig
from kaa.services.field import FieldService
from kaa.services.sim import SimulationService, loglog_slope
from kaa.utils.logger import get_logger
from kaa.utils.metrics_collector import RunMetrics, system_summary
from kaa.utils.output_writers import RunWriter
from kaa.utils.response_helpers import handle_service_error, success_response

logger = get_logger('kaa.routes.sim')

PROFILE_RADII = 48


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}", path=path)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e.msg} (line {e.lineno})", path=path)
    return SimConfig.from_dict(data)


def _flush(writer: RunWriter, result, metrics: RunMetrics, summary: dict):
    writer.particles(result.ensemble, result.charge)
    writer.diagnostics(result.records)
    SimulationService.save_checkpoint(writer.path('checkpoint.npz'), result)
    writer.written.append('checkpoint.npz')
    metrics.write(writer.path('metrics.prom'))
    writer.written.append('metrics.prom')
    summary['outputs'] = writer.written + ['summary.json']
    writer.summary(summary)


def analyse(result, cfg: SimConfig) -> dict:
    """Profile, charge fit and drift report of a finished run; each skipped if its window is too short"""
    p = cfg.params
    profile = fit = drift = None
    try:
        profile = SimulationService.profile_for(result, cfg)
    except WindowTooShortError as e:
        logger.warning(f"asymptotic profile skipped: {e.message}")
    try:
        fit = SimulationService.charge_asymptotics(result.records, p.Qc, profile, cfg.profile_window)
    except IllConditionedWindowError as e:
        logger.warning(f"charge fit skipped: {e.message}")
    if profile is not None:
        drift = SimulationService.scattering_drift(result.snapshots, profile, p,
                                                   cfg.bulk_speed, cfg.bulk_spread)
    return SimulationService.summarize(result, cfg, fit, drift, profile)


@handle_service_error
def simulate(args):
    """Run a configured simulation and write every artifact into --out"""
    cfg = load_config(args.config)
    writer = RunWriter(args.out)
    metrics = RunMetrics()
    try:
        result = SimulationService.run(cfg, resume=args.resume, metrics=metrics,
                                       checkpoint_path=writer.path('checkpoint.npz'),
                                       checkpoint_every=args.checkpoint_every)
    except SimulationError as e:
        partial = getattr(e, 'partial', None)
        if partial is not None:
            logger.warning(f"flushing partial outputs after {partial.steps_done} steps")
            _flush(writer, partial, metrics, {
                'completed': False,
                'steps': partial.steps_done,
                't_final': partial.ensemble.t,
                'error': e.to_dict(),
            })
        raise

    summary = analyse(result, cfg)
    summary['config'] = cfg.to_dict()
    summary['system'] = system_summary()
    _flush(writer, result, metrics, summary)
    writer.plot_script()
    return success_response({
        'out': args.out,
        'outputs': writer.written,
        'verdicts': summary['verdicts'],
    })


@handle_service_error
def field_profile(args):
    """Radial samples of psi and E around the charge at the final (or checkpointed) time"""
    cfg = load_config(args.config)
    if args.checkpoint:
        result = SimulationService.load_checkpoint(args.checkpoint)
    else:
        result = SimulationService.run(cfg)
    ens = result.ensemble

    direction = np.asarray(args.direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise ConfigError("--direction must be non-zero")
    radii = np.logspace(-1.0, 1.0, args.radii) * (1.0 + ens.t) * result.v_scale
    sample = FieldService.field_sample(radii[:, None] * (direction / norm), ens, cfg.eps)

    writer = RunWriter(args.out)
    writer.field_profile(ens.t, radii, sample)
    writer.plot_script(with_profile=True)
    magnitude = np.linalg.norm(sample.E, axis=1)
    far = radii >= (1.0 + ens.t) * result.v_scale
    return success_response({
        'out': args.out,
        'outputs': writer.written,
        't': ens.t,
        'far_decay_slope': loglog_slope(radii[far], magnitude[far]),
    })


def register(subparsers, vector):
    """Attach the simulation commands to the CLI"""
    parser = subparsers.add_parser('simulate', help='Run a mean-field simulation from a JSON config')
    parser.add_argument('--config', required=True)
    parser.add_argument('--out', required=True)
    parser.add_argument('--resume', help='checkpoint.npz to continue from')
    parser.add_argument('--checkpoint-every', type=int, default=0, dest='checkpoint_every')
    parser.set_defaults(handler=simulate)

    parser = subparsers.add_parser('field-profile', help='Radial field samples of a run')
    parser.add_argument('--config', required=True)
    parser.add_argument('--out', required=True)
    parser.add_argument('--checkpoint', help='use this checkpoint instead of running the config')
    parser.add_argument('--direction', type=vector, default=np.array([1.0, 0.0, 0.0]))
    parser.add_argument('--radii', type=int, default=PROFILE_RADII)
    parser.set_defaults(handler=field_profile)
