"""Allow ``python -m pyhsrp``."""

import sys

from .cli import main

sys.exit(main())
