# run_experiments.py - Experiment runner entry script in project root
#!/usr/bin/env python3
"""
Entry point for the experiment CLI.
Run this from the project root directory, e.g.

    python run_experiments.py synth --out data/synthetic
    python run_experiments.py train --dataset data/synthetic --rate 0.5 --out runs/demo
    python run_experiments.py eval --checkpoint runs/demo/checkpoint.bin --dataset data/synthetic --rate 0.5
"""

import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

if __name__ == "__main__":
    try:
        from cli.main import main
    except ImportError as e:
        print(f"❌ Import error: {e}")
        print("Make sure all dependencies from requirements.txt are installed")
        sys.exit(1)

    sys.exit(main())
