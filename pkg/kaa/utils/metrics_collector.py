"""
Prometheus metrics for simulation runs and verification suites
Written to a textfile (node-exporter textfile collector format) at the end of a run
"""

import os
import time

import psutil
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile

START_TIME = time.time()


class RunMetrics:
    """Metrics collector bound to a private registry"""

    def __init__(self, registry: CollectorRegistry = None):
        self.registry = registry or CollectorRegistry()

        self.steps_total = Counter(
            'kaa_steps_total',
            'Total integrator steps taken',
            registry=self.registry
        )
        self.step_duration_seconds = Histogram(
            'kaa_step_duration_seconds',
            'Wall time per integrator step in seconds',
            buckets=(0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0),
            registry=self.registry
        )
        self.particles = Gauge(
            'kaa_particles',
            'Number of gas particles in the ensemble',
            registry=self.registry
        )
        self.sim_time = Gauge(
            'kaa_sim_time',
            'Current simulation time',
            registry=self.registry
        )
        self.energy_drift = Gauge(
            'kaa_energy_drift_relative',
            'Relative total energy drift since t=0',
            registry=self.registry
        )
        self.momentum_drift = Gauge(
            'kaa_momentum_drift_relative',
            'Relative total momentum drift since t=0',
            registry=self.registry
        )
        self.suite_max_residual = Gauge(
            'kaa_suite_max_residual',
            'Maximum residual of a verification suite',
            ['suite'],
            registry=self.registry
        )
        self.suite_failures = Counter(
            'kaa_suite_failures_total',
            'Verification suites that failed',
            ['suite'],
            registry=self.registry
        )
        self.process_rss_bytes = Gauge(
            'kaa_process_rss_bytes',
            'Resident set size of the process in bytes',
            registry=self.registry
        )
        self.uptime_seconds = Gauge(
            'kaa_uptime_seconds',
            'Process uptime in seconds',
            registry=self.registry
        )

    def record_step(self, duration: float, t: float):
        self.steps_total.inc()
        self.step_duration_seconds.observe(duration)
        self.sim_time.set(t)

    def record_conservation(self, energy_drift: float, momentum_drift: float):
        self.energy_drift.set(energy_drift)
        self.momentum_drift.set(momentum_drift)

    def record_suite(self, suite: str, max_residual: float, passed: bool):
        self.suite_max_residual.labels(suite=suite).set(max_residual)
        if not passed:
            self.suite_failures.labels(suite=suite).inc()

    def update_system_metrics(self):
        """Refresh process metrics; psutil failures are ignored"""
        try:
            self.process_rss_bytes.set(psutil.Process(os.getpid()).memory_info().rss)
            self.uptime_seconds.set(time.time() - START_TIME)
        except psutil.Error:
            pass

    def write(self, path: str):
        self.update_system_metrics()
        write_to_textfile(path, self.registry)


def system_summary() -> dict:
    """Host facts recorded in run summaries"""
    try:
        proc = psutil.Process(os.getpid())
        return {
            'cpu_count_physical': psutil.cpu_count(logical=False),
            'cpu_count_logical': psutil.cpu_count(),
            'rss_bytes': proc.memory_info().rss,
            'uptime_seconds': round(time.time() - START_TIME, 3),
        }
    except psutil.Error:
        return {}
