"""Entry point for ``python -m isec``."""

from isec.cli import main

raise SystemExit(main())
