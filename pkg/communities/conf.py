"""Access to the ``CASCADE_COMMUNITIES`` settings dict with packaged defaults."""
from typing import Any

DEFAULTS = {
    'CALIBRATION_BATCH_SIZE': 2000,
    'CALIBRATION_TOLERANCE': 0.10,
    'CALIBRATION_MAX_ITERS': 60,
    'CALIBRATION_RATE_BOUNDS': (1e-6, 1e4),
    'LOUVAIN_MIN_GAIN': 1e-10,
    'SURROGATE_MIN_WEIGHT': 1e-12,
    'DELTA_GRID': [0.0] + [0.01 * 2 ** k for k in range(21)],
    'DELTA_UPPER_WARN': 1e4,
    'DELTA_XTOL': 1e-4,
    'S_BUCKETS': [2.0 ** k for k in range(-5, 6)],
    'LFR_REWIRE_FACTOR': 100,
    'LFR_MAX_RETRIES': 10,
    'LFR_MAX_ASSIGN_ITERS': 50,
    'BENCH_WORKERS': 1,
}


def get_setting(name: str) -> Any:
    """Return a toolkit setting, falling back to the default when Django is not configured."""
    from django.conf import settings

    if settings.configured:
        overrides = getattr(settings, 'CASCADE_COMMUNITIES', {})
        if name in overrides:
            return overrides[name]
    return DEFAULTS[name]
