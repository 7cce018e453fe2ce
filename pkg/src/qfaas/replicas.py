"""Replica pools: the containerization stand-in.

A replica is a lightweight worker bound to one immutable function version;
it serves one invocation at a time.  Routing is strict round-robin: the
i-th acquisition goes to replica i mod pool size and waits for that
replica specifically, so a fixed workload divides evenly and queueing
behaves like single-server queues in parallel.

A pool scaled to zero cold-starts on demand: the first acquisition pays
the configured activation delay and leaves one warm replica behind.
"""

from __future__ import annotations

import contextlib
import threading
import time
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List

from .ir import CircuitTemplate


@dataclass(frozen=True)
class FunctionVersion:
    """Everything a replica needs to serve an invocation, frozen per version."""

    name: str
    version: int
    template: CircuitTemplate
    config: Dict[str, Any]
    pre_processor: str
    post_processor: str
    image_digest: str


class Replica:
    def __init__(self, replica_id: str, version: FunctionVersion):
        self.replica_id = replica_id
        self.version = version
        self.busy = threading.Lock()
        self.served = 0


class ReplicaPool:
    def __init__(
        self,
        version: FunctionVersion,
        count: int,
        cold_start_millis: int = 500,
        overhead_millis: int = 0,
    ):
        self.version = version
        self.cold_start_millis = cold_start_millis
        self.overhead_millis = overhead_millis
        self._lock = threading.Lock()
        self._counter = 0
        self._spawned = 0
        self._replicas: List[Replica] = []
        if count:
            self._grow(count)

    def _grow(self, by: int) -> None:
        for _ in range(by):
            replica_id = f"{self.version.name}-v{self.version.version}-{self._spawned}"
            self._spawned += 1
            self._replicas.append(Replica(replica_id, self.version))

    @property
    def size(self) -> int:
        with self._lock:
            return len(self._replicas)

    def scale(self, count: int) -> None:
        with self._lock:
            current = len(self._replicas)
            if count > current:
                self._grow(count - current)
            elif count < current:
                # Dropped replicas finish any in-flight session; they simply
                # stop receiving assignments.
                del self._replicas[count:]

    def acquire(self) -> Replica:
        with self._lock:
            if not self._replicas:
                time.sleep(self.cold_start_millis / 1000.0)
                self._grow(1)
            replica = self._replicas[self._counter % len(self._replicas)]
            self._counter += 1
        replica.busy.acquire()
        return replica

    @contextlib.contextmanager
    def session(self) -> Iterator[Replica]:
        """Hold one replica for the duration of an invocation.

        The configured per-replica overhead is spent while still holding the
        replica: it models the pod's fixed service time.
        """
        replica = self.acquire()
        try:
            yield replica
        finally:
            if self.overhead_millis > 0:
                time.sleep(self.overhead_millis / 1000.0)
            replica.served += 1
            replica.busy.release()

    def stats(self) -> Dict[str, Any]:
        with self._lock:
            replicas = list(self._replicas)
        return {
            "version": self.version.version,
            "active_replicas": len(replicas),
            "served": sum(r.served for r in replicas),
        }
