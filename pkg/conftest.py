"""Wire the Django test environment for pytest, as `manage.py test` would."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'blandau.settings')
django.setup()

from django.test.utils import (  # noqa: E402
    setup_databases, setup_test_environment, teardown_databases,
    teardown_test_environment,
)

_db_config = None


def pytest_sessionstart(session):
    global _db_config
    setup_test_environment()
    _db_config = setup_databases(verbosity=0, interactive=False)


def pytest_sessionfinish(session, exitstatus):
    if _db_config is not None:
        teardown_databases(_db_config, verbosity=0)
    teardown_test_environment()
