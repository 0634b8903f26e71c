#!/usr/bin/env python
"""Entry point for running the distbeam CLI from a checkout."""

import sys
from pathlib import Path

# Add the repository root to the path so `src` imports resolve
sys.path.insert(0, str(Path(__file__).parent))

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
