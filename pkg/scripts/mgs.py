#!/usr/bin/env python3
"""
M-GS command-line entry point.

    python scripts/mgs.py synth --scene config/scenes/arm_swing.yaml --out-dir results/arm_swing
    python scripts/mgs.py fit --in results/arm_swing --out results/arm_swing_fit
    python scripts/mgs.py eval --pred results/arm_swing_fit --gt results/arm_swing/gt.poses
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
