#!/usr/bin/env python3
"""
Entry point for the discrete auction solver.

Usage:
    python scripts/discrete_auctions.py solve-symmetric --structure fp --ties none --n 2 --x 10
    python scripts/discrete_auctions.py tables --which 1
"""

import logging
import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from cli.main import run


if __name__ == '__main__':
    try:
        sys.exit(run(sys.argv[1:]))
    except KeyboardInterrupt:
        print("\n\nRun interrupted by user")
        sys.exit(1)
    except Exception as e:
        logging.error(f"Run crashed: {e}", exc_info=True)
        sys.exit(1)
