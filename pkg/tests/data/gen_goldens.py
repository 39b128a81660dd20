"""Regenerate the committed end-to-end golden digests.

Run from the repository root after an intentional output-format change:
    python tests/data/gen_goldens.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from e2e_driver import GOLDEN_PATH, run_pipeline  # noqa: E402


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        digests = run_pipeline(Path(tmp) / "e2e")
    GOLDEN_PATH.write_text(json.dumps(digests, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(digests)} digests to {GOLDEN_PATH}")


if __name__ == "__main__":
    main()
