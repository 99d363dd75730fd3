# -------------------------------------------------- #
# `python -m blandau <subcommand>` runs a subcommand #
# exactly like `python manage.py <subcommand>`.      #
# -------------------------------------------------- #

import os
import sys

def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'blandau.settings')
    from django.core.management import execute_from_command_line
    execute_from_command_line(['blandau', *sys.argv[1:]])

if __name__ == '__main__':
    main()
