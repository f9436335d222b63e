"""Entry point for python -m sphere_multipliers."""

import sys

from .cli import main

sys.exit(main())
