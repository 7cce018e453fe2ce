"""File-backed document store: one directory per collection, one file per
document, write-then-rename commits.

Atomicity comes from os.replace; a reader observes either the previous
revision or the new one, never a torn file.  Documents above a size
threshold are gzip-compressed (job counts can run to 2^20 keys).  During
the form switch both files may briefly coexist; readers resolve that by
taking the higher revision.
"""

from __future__ import annotations

import gzip
import json
import os
import threading
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from .errors import NotFound, StorageError

COMPRESS_THRESHOLD = 64 * 1024

# Test seam: a fault hook may raise at these points to simulate a crash.
FAULT_POINTS = ("before_write", "after_write", "after_replace", "after_cleanup")

Predicate = Union[Dict[str, Any], Callable[[Any], bool], None]


@dataclass(frozen=True)
class Document:
    collection: str
    id: str
    body: Any
    revision: int


def _encode_id(doc_id: str) -> str:
    # Dots are escaped too: the only dots in a filename then belong to the
    # suffix, and no encoded id can start with "." (reserved for temp files).
    return urllib.parse.quote(doc_id, safe="").replace(".", "%2E")


class DocumentStore:
    def __init__(
        self,
        root: Union[str, Path],
        compress_threshold: int = COMPRESS_THRESHOLD,
        fault_hook: Optional[Callable[[str], None]] = None,
    ):
        self.root = Path(root)
        self.compress_threshold = compress_threshold
        self.fault_hook = fault_hook
        self._registry_lock = threading.Lock()
        self._doc_locks: Dict[str, threading.Lock] = {}
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create data directory: {exc}")

    def _lock_for(self, collection: str, doc_id: str) -> threading.Lock:
        key = f"{collection}/{doc_id}"
        with self._registry_lock:
            lock = self._doc_locks.get(key)
            if lock is None:
                lock = self._doc_locks[key] = threading.Lock()
            return lock

    def _fire(self, point: str) -> None:
        if self.fault_hook is not None:
            self.fault_hook(point)

    def _paths(self, collection: str, doc_id: str) -> List[Path]:
        # Suffixes are appended to the full encoded id: ids may contain dots,
        # so Path.with_suffix would clip them.
        name = _encode_id(doc_id)
        base = self.root / collection
        return [base / (name + ".json"), base / (name + ".json.gz")]

    @staticmethod
    def _read_file(path: Path) -> Optional[Dict[str, Any]]:
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}")
        if path.name.endswith(".gz"):
            raw = gzip.decompress(raw)
        return json.loads(raw.decode("utf-8"))

    def _load_latest(self, collection: str, doc_id: str) -> Optional[Dict[str, Any]]:
        best = None
        for path in self._paths(collection, doc_id):
            record = self._read_file(path)
            if record and (best is None or record["revision"] > best["revision"]):
                best = record
        return best

    @staticmethod
    def _fsync_dir(directory: Path) -> None:
        fd = os.open(directory, os.O_RDONLY)
        try:
            os.fsync(fd)
        finally:
            os.close(fd)

    def put(self, collection: str, doc_id: str, body: Any) -> Document:
        if not doc_id:
            raise ValueError("document id must be nonempty")
        with self._lock_for(collection, doc_id):
            directory = self.root / collection
            directory.mkdir(parents=True, exist_ok=True)

            current = self._load_latest(collection, doc_id)
            revision = (current["revision"] if current else 0) + 1
            record = {"id": doc_id, "revision": revision, "body": body}
            data = json.dumps(record, separators=(",", ":")).encode("utf-8")

            compress = len(data) > self.compress_threshold
            if compress:
                data = gzip.compress(data, mtime=0)
            json_path, gz_path = self._paths(collection, doc_id)
            final = gz_path if compress else json_path
            other = json_path if compress else gz_path
            tmp = directory / f".{final.name}.tmp"

            try:
                self._fire("before_write")
                fd = os.open(tmp, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o644)
                try:
                    os.write(fd, data)
                    os.fsync(fd)
                finally:
                    os.close(fd)
                self._fire("after_write")
                os.replace(tmp, final)
                self._fire("after_replace")
                # Drop the stale other-form file, if any, then persist the
                # directory entries.  A crash in between is resolved on read
                # by the higher revision.
                try:
                    os.unlink(other)
                except FileNotFoundError:
                    pass
                self._fsync_dir(directory)
                self._fire("after_cleanup")
            except OSError as exc:
                raise StorageError(f"write failed for {collection}/{doc_id}: {exc}")
            return Document(collection, doc_id, body, revision)

    def get(self, collection: str, doc_id: str) -> Document:
        record = self._load_latest(collection, doc_id)
        if record is None:
            raise NotFound(f"{collection}/{doc_id} does not exist")
        return Document(collection, doc_id, record["body"], record["revision"])

    def delete(self, collection: str, doc_id: str) -> None:
        with self._lock_for(collection, doc_id):
            directory = self.root / collection
            removed = False
            for path in self._paths(collection, doc_id):
                try:
                    os.unlink(path)
                    removed = True
                except FileNotFoundError:
                    pass
                except OSError as exc:
                    raise StorageError(f"delete failed: {exc}")
            if removed:
                self._fsync_dir(directory)

    def query(self, collection: str, where: Predicate = None) -> List[Document]:
        directory = self.root / collection
        if not directory.is_dir():
            return []
        latest: Dict[str, Dict[str, Any]] = {}
        for path in sorted(directory.iterdir()):
            if path.name.startswith("."):
                continue  # in-flight temp files
            try:
                record = self._read_file(path)
            except (OSError, ValueError):
                continue
            if record is None:
                continue
            held = latest.get(record["id"])
            if held is None or record["revision"] > held["revision"]:
                latest[record["id"]] = record

        docs = [
            Document(collection, rec["id"], rec["body"], rec["revision"])
            for rec in latest.values()
        ]
        docs.sort(key=lambda d: d.id)
        if where is None:
            return docs
        if callable(where):
            return [d for d in docs if where(d.body)]
        return [
            d
            for d in docs
            if isinstance(d.body, dict)
            and all(d.body.get(k) == v for k, v in where.items())
        ]

    def collections(self) -> List[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())
