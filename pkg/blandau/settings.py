"""
Django settings for the blandau project.

The project has no web surface: Django provides the command line through the
management commands of the `runs` app, the run ledger database, the logging
configuration and the test runner.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/3.2/ref/settings/
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='blandau-development-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Custom Apps
    'runs',

    # Default apps
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
]

MIDDLEWARE = [
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
]

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]


# Database
# https://docs.djangoproject.com/en/3.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Default primary key field type
# https://docs.djangoproject.com/en/3.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Blandau

# Where the subcommands write their artifacts unless --out is given
BLANDAU_OUTPUT_DIR = Path(config('BLANDAU_OUTPUT_DIR', default=str(BASE_DIR / 'output')))

# Store a RunRecord with its artifacts for every subcommand
BLANDAU_RECORD_RUNS = config('BLANDAU_RECORD_RUNS', default=False, cast=bool)

# The joblib workers of the trajectory and disorder ensembles
BLANDAU_WORKERS = config('BLANDAU_WORKERS', default=1, cast=int)

# Enables the desk-scale acceptance runs of the test suite
BLANDAU_SLOW_TESTS = config('BLANDAU_SLOW_TESTS', default=False, cast=bool)

BLANDAU_LOG_LEVEL = config('BLANDAU_LOG_LEVEL', default='INFO')
BLANDAU_LOG_FILE = config('BLANDAU_LOG_FILE', default='')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        **({
            'file': {
                'class': 'logging.FileHandler',
                'filename': BLANDAU_LOG_FILE,
                'formatter': 'simple',
            },
        } if BLANDAU_LOG_FILE else {}),
    },
    'loggers': {
        'blandau': {
            'handlers': ['console', 'file'] if BLANDAU_LOG_FILE else ['console'],
            'level': BLANDAU_LOG_LEVEL,
            'propagate': False,
        },
        'django': {
            'handlers': ['console', 'file'] if BLANDAU_LOG_FILE else ['console'],
            'level': 'WARNING',
            'propagate': True,
        },
    },
    'formatters': {
        'simple': {
            'format': '[{levelname} - {asctime}]: {message}',
            'style': '{',
        },
    },
}
