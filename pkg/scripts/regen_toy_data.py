"""Regenerate the committed synthetic toy corpora under data/toy/.

The files are deterministic outputs of lrmt.toydata; re-running this script
must be a no-op unless the generator changed.
"""

from pathlib import Path

from lrmt.toydata import write_toy_pair

ROOT = Path(__file__).resolve().parent.parent / "data" / "toy"
SIZES = {"train": 500, "valid": 50, "test": 50}

for i, indic in enumerate(("as", "kha", "lus", "mni")):
    paths = write_toy_pair(ROOT, "en", indic, sizes=SIZES, seed=100 + i)
    print(f"en-{indic}: " + ", ".join(str(p) for p in paths.values()))
