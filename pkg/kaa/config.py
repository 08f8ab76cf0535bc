"""
Runtime settings for kaa
Values come from the environment (optionally a .env file) with sane defaults
"""

import os
from dataclasses import dataclass, field, fields

import psutil
from dotenv import load_dotenv

load_dotenv()


def _default_threads() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


@dataclass
class Settings:
    threads: int = field(default_factory=lambda: int(os.getenv('KAA_THREADS', _default_threads())))
    tol_fold: float = field(default_factory=lambda: float(os.getenv('KAA_TOL_FOLD', '1e-10')))
    log_level: str = field(default_factory=lambda: os.getenv('LOG_LEVEL', 'INFO'))
    log_format: str = field(default_factory=lambda: os.getenv('LOG_FORMAT', 'text'))
    log_dir: str = field(default_factory=lambda: os.getenv('LOG_DIR', 'logs'))
    environment: str = field(default_factory=lambda: os.getenv('ENVIRONMENT', 'development'))

    def update(self, **overrides) -> 'Settings':
        """Override settings in place (tests, CLI flags)"""
        known = {f.name for f in fields(self)}
        for key, value in overrides.items():
            if key not in known:
                raise KeyError(f"Unknown setting: {key}")
            setattr(self, key, value)
        return self

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


settings = Settings()


def configure_threads(threads: int = None) -> int:
    """Cap numba parallelism at KAA_THREADS; returns the value in effect"""
    import numba

    wanted = threads or settings.threads
    n = max(1, min(int(wanted), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
