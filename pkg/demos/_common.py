"""Shared output location for the demo scripts."""

import os
from pathlib import Path

OUT = Path(os.environ.get("MORPHOSPLIT_OUTPUT_DIR", Path(__file__).with_name("output")))
OUT.mkdir(parents=True, exist_ok=True)
