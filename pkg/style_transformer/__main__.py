"""Allow ``python -m style_transformer``."""
import sys

from .cli.main import main

sys.exit(main())
