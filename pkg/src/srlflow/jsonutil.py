"""One canonical JSON encoding, shared by the CLI and anything that needs
byte-stable artifacts (sorted keys, two-space indent, trailing newline)."""

from __future__ import annotations

import json


def dump_canonical(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
