"""Flat-file JSON result cache keyed by content hash.

Keys hash the full job description plus the package version, so stale
results can never be replayed across code changes.  Writes are atomic
renames; the cache is safe under the survey runner's process pool and is
always disposable.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import ptower


def cache_key(payload: dict) -> str:
    blob = json.dumps(
        {"version": ptower.__version__, "job": payload}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResultCache:
    def __init__(self, directory: str | None):
        self.directory = directory
        if directory:
            os.makedirs(directory, exist_ok=True)

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, key + ".json")

    def get(self, key: str) -> str | None:
        if not self.directory:
            return None
        try:
            with open(self._path(key), encoding="utf-8") as fh:
                return fh.read()
        except FileNotFoundError:
            return None

    def put(self, key: str, text: str) -> None:
        if not self.directory:
            return
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
