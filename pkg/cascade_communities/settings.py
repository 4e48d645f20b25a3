import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get(
    'CASCADE_COMMUNITIES_SECRET_KEY',
    'django-insecure-cascade-communities-local-only',
)

DEBUG = True

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'rest_framework',
    'communities',
]

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'autoescape': True,
        },
    },
]

# No models; the toolkit keeps its state in plain files.
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'communities': {
            'handlers': ['console'],
            'level': os.environ.get('CASCADE_COMMUNITIES_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}

# Overrides for the toolkit defaults in communities.conf.DEFAULTS,
# e.g. {'CALIBRATION_BATCH_SIZE': 5000, 'BENCH_WORKERS': 4}.
CASCADE_COMMUNITIES = {}
