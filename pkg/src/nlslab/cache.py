"""Small on-disk JSON cache for computed constants.

Entries are keyed by a dict of primitives; the key is embedded in the
stored payload and checked on load, so hash collisions are harmless.
Writes go through a temp file + rename to stay atomic under concurrent
sweep workers.  The directory comes from NLSLAB_CACHE_DIR, defaulting to
~/.cache/nlslab.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

_ENV_VAR = "NLSLAB_CACHE_DIR"


def cache_dir() -> str:
    base = os.environ.get(_ENV_VAR)
    if not base:
        base = os.path.join(os.path.expanduser("~"), ".cache", "nlslab")
    return base


def _path(key: dict) -> str:
    blob = json.dumps(key, sort_keys=True)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:24]
    return os.path.join(cache_dir(), f"{key.get('kind', 'entry')}-{digest}.json")


def load(key: dict) -> dict | None:
    path = _path(key)
    try:
        with open(path) as fh:
            stored = json.load(fh)
    except (OSError, ValueError):
        return None
    if stored.get("key") != key:
        return None
    return stored.get("value")


def store(key: dict, value: dict) -> None:
    path = _path(key)
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump({"key": key, "value": value}, fh)
        os.replace(tmp, path)
    except OSError:
        pass  # caching is best-effort; never fail the computation
