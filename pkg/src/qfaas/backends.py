"""Providers, backends, and the job lifecycle.

External providers are mocked: each external backend owns one FIFO worker
thread that sleeps a seeded queue delay, flips the job to RUNNING, executes
on the embedded simulator, and completes it.  The internal simulator
executes inline on the submitting thread, so concurrency scales with the
caller's replica pool rather than a single worker.
"""

from __future__ import annotations

import enum
import json
import queue
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from . import simulator
from .errors import (
    BackendNotFound,
    BackendUnavailable,
    CapacityExceeded,
    EmptyList,
    JobNotFound,
    NoEligibleBackend,
    PermissionDenied,
    ProviderAuthError,
    ProviderNotFound,
)
from .ir import Circuit

DEFAULT_INTERNAL_BACKEND = "internal_simulator"
DEFAULT_INTERNAL_PROVIDER = "internal"


class BackendType(str, enum.Enum):
    INTERNAL_SIMULATOR = "internal_simulator"
    EXTERNAL_SIMULATOR = "external_simulator"
    QPU = "qpu"


class ProviderKind(str, enum.Enum):
    INTERNAL = "internal"
    MOCK_IBMQ = "mock_ibmq"
    MOCK_BRAKET = "mock_braket"


class JobStatus(str, enum.Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    ERROR = "ERROR"


def _provider_kind(name: str) -> ProviderKind:
    if name == DEFAULT_INTERNAL_PROVIDER:
        return ProviderKind.INTERNAL
    if name == "ibmq":
        return ProviderKind.MOCK_IBMQ
    return ProviderKind.MOCK_BRAKET


def format_timestamp(moment: Optional[datetime]) -> Optional[str]:
    """Code-3 style: "2022-03-15 05:00:24.072000+00:00", microseconds kept."""
    if moment is None:
        return None
    return moment.isoformat(sep=" ", timespec="microseconds")


@dataclass
class ServiceTimeModel:
    base_millis: float = 0.0
    per_shot_micros: float = 0.0
    per_gate_micros: float = 0.0

    def duration_seconds(self, shots: int, gates: int) -> float:
        millis = (
            self.base_millis
            + shots * self.per_shot_micros / 1000.0
            + gates * self.per_gate_micros / 1000.0
        )
        return millis / 1000.0


@dataclass
class Backend:
    name: str
    provider: str
    type: BackendType
    qubits: int
    operational: bool = True
    per_task_price: Decimal = Decimal("0")
    per_shot_price: Decimal = Decimal("0")
    queue_delay_millis: int = 0
    jitter_millis: int = 0
    service_time: ServiceTimeModel = field(default_factory=ServiceTimeModel)
    _pending: int = field(default=0, repr=False)

    @property
    def queue_length(self) -> int:
        return self._pending

    def to_doc(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "provider": self.provider,
            "type": self.type.value,
            "qubits": self.qubits,
            "operational": self.operational,
            "queue_length": self.queue_length,
            "per_task_price": str(self.per_task_price),
            "per_shot_price": str(self.per_shot_price),
        }


@dataclass
class Provider:
    name: str
    kind: ProviderKind
    backend_names: List[str] = field(default_factory=list)

    @property
    def requires_credential(self) -> bool:
        return self.kind is not ProviderKind.INTERNAL


@dataclass
class BackendInfo:
    """Selection request: either autoselect over types, or a named backend."""

    provider: str = DEFAULT_INTERNAL_PROVIDER
    autoselect: bool = True
    types: Tuple[str, ...] = ()
    backend_name: Optional[str] = None
    internal: bool = True


@dataclass(eq=False)
class Job:
    job_id: str
    provider_job_id: str
    owner: str
    function_name: str
    backend_name: str
    shots: int
    seed: int
    status: JobStatus = JobStatus.QUEUED
    submit_time: Optional[datetime] = None
    running_start_time: Optional[datetime] = None
    completion_time: Optional[datetime] = None
    total_run_time: Optional[float] = None
    counts: Optional[simulator.Counts] = None
    result: Any = None
    error: Optional[str] = None
    circuit: Optional[Circuit] = field(default=None, repr=False)
    # Post-processing attaches these after the run itself succeeded: extra
    # response-detail fields, and any error to re-raise to a waiting caller.
    post_detail: Optional[Dict[str, Any]] = field(default=None, repr=False)
    post_error: Optional[Exception] = field(default=None, repr=False)
    _done: threading.Event = field(default_factory=threading.Event, repr=False)
    _callbacks: List[Callable[["Job"], None]] = field(
        default_factory=list, repr=False
    )

    def to_doc(self) -> Dict[str, Any]:
        return {
            "job_id": self.job_id,
            "provider_job_id": self.provider_job_id,
            "owner": self.owner,
            "function_name": self.function_name,
            "backend_name": self.backend_name,
            "shots": self.shots,
            "seed": self.seed,
            "status": self.status.value,
            "submit_time": format_timestamp(self.submit_time),
            "running_start_time": format_timestamp(self.running_start_time),
            "completion_time": format_timestamp(self.completion_time),
            "total_run_time": self.total_run_time,
            "counts": dict(self.counts) if self.counts is not None else None,
            "result": self.result,
            "detail": self.post_detail,
            "error": self.error,
        }


# --- catalog -------------------------------------------------------------------

def default_catalog_path() -> Path:
    return Path(str(resources.files("qfaas") / "data" / "catalog.json"))


def load_catalog(path: Optional[Union[str, Path]] = None) -> List[Dict[str, Any]]:
    """Catalog file: JSON array of backend entries; floats become Decimal."""
    target = Path(path) if path is not None else default_catalog_path()
    return json.loads(target.read_text(), parse_float=Decimal)


def _backend_from_entry(entry: Dict[str, Any]) -> Backend:
    model = entry.get("serviceTimeModel") or {}
    backend = Backend(
        name=entry["name"],
        provider=entry["provider"],
        type=BackendType(entry["type"]),
        qubits=int(entry["qubits"]),
        operational=bool(entry.get("operational", True)),
        per_task_price=Decimal(entry.get("perTaskPrice", 0)),
        per_shot_price=Decimal(entry.get("perShotPrice", 0)),
        queue_delay_millis=int(entry.get("queueDelayMillis", 0)),
        jitter_millis=int(entry.get("jitterMillis", 0)),
        service_time=ServiceTimeModel(
            base_millis=float(model.get("baseMillis", 0)),
            per_shot_micros=float(model.get("perShotMicros", 0)),
            per_gate_micros=float(model.get("perGateMicros", 0)),
        ),
    )
    if backend.qubits < 1:
        raise ValueError(f"backend {backend.name}: qubits must be >= 1")
    if backend.per_task_price < 0 or backend.per_shot_price < 0:
        raise ValueError(f"backend {backend.name}: prices must be >= 0")
    return backend


# --- selection and pricing -------------------------------------------------------

def get_least_busy(backends: Sequence[Backend]) -> Backend:
    """Shortest queue wins; ties go to the lexicographically smallest name."""
    if not backends:
        raise EmptyList("no backends to choose from")
    return min(backends, key=lambda b: (b.queue_length, b.name))


def estimate_cost(backend: Backend, tasks: int, shots: int) -> Decimal:
    """tasks x perTaskPrice + shots x perShotPrice, exact to 2 places."""
    if tasks < 1:
        raise ValueError("tasks must be >= 1")
    if shots < 0:
        raise ValueError("shots must be >= 0")
    total = tasks * backend.per_task_price + shots * backend.per_shot_price
    return total.quantize(Decimal("0.01"))


# --- manager ----------------------------------------------------------------------

class BackendManager:
    """Owns the provider/backend registry and every job's lifecycle."""

    def __init__(
        self,
        catalog: Optional[List[Dict[str, Any]]] = None,
        queue_seed: int = 0,
        on_update: Optional[Callable[[Job], None]] = None,
    ):
        if catalog is None:
            catalog = load_catalog()
        self._lock = threading.RLock()
        self._on_update = on_update
        self._queue_seed = queue_seed
        self.backends: Dict[str, Backend] = {}
        self.providers: Dict[str, Provider] = {}
        self.jobs: Dict[str, Job] = {}
        self._queues: Dict[str, "queue.Queue"] = {}
        self._workers: Dict[str, threading.Thread] = {}
        self._delay_rngs: Dict[str, random.Random] = {}
        self._closed = False

        for entry in catalog:
            backend = _backend_from_entry(entry)
            if backend.name in self.backends:
                raise ValueError(f"duplicate backend name {backend.name!r}")
            self.backends[backend.name] = backend
            provider = self.providers.get(backend.provider)
            if provider is None:
                provider = Provider(backend.provider, _provider_kind(backend.provider))
                self.providers[backend.provider] = provider
            provider.backend_names.append(backend.name)

        # The internal provider always exists, catalog or not.
        if DEFAULT_INTERNAL_PROVIDER not in self.providers:
            self.providers[DEFAULT_INTERNAL_PROVIDER] = Provider(
                DEFAULT_INTERNAL_PROVIDER, ProviderKind.INTERNAL
            )
        internal = self.providers[DEFAULT_INTERNAL_PROVIDER]
        if not internal.backend_names:
            fallback = Backend(
                name=DEFAULT_INTERNAL_BACKEND,
                provider=DEFAULT_INTERNAL_PROVIDER,
                type=BackendType.INTERNAL_SIMULATOR,
                qubits=20,
            )
            self.backends[fallback.name] = fallback
            internal.backend_names.append(fallback.name)

    # -- selection --

    def backend_selection(
        self,
        required_qubits: int,
        info: BackendInfo,
        credential: Optional[str] = None,
    ) -> Backend:
        if required_qubits < 1:
            raise ValueError("required_qubits must be >= 1")
        provider = self.providers.get(info.provider)
        if provider is None:
            raise ProviderNotFound(f"unknown provider {info.provider!r}")
        if provider.requires_credential and not credential:
            raise ProviderAuthError(
                f"no credential registered for provider {info.provider!r}"
            )
        candidates = [self.backends[name] for name in provider.backend_names]

        if info.internal:
            name = info.backend_name or DEFAULT_INTERNAL_BACKEND
            backend = self.backends.get(name)
            if backend is None or backend.type is not BackendType.INTERNAL_SIMULATOR:
                raise BackendNotFound(f"no internal backend named {name!r}")
            return backend

        types = set(info.types)
        eligible = [
            b
            for b in candidates
            if b.qubits >= required_qubits
            and b.operational
            and (not types or b.type.value in types)
        ]
        if info.autoselect:
            if not eligible:
                raise NoEligibleBackend(
                    f"no operational backend with >= {required_qubits} qubits "
                    f"matches types {sorted(types)}"
                )
            return get_least_busy(eligible)

        named = [b for b in candidates if b.name == info.backend_name]
        if not named:
            raise BackendNotFound(
                f"provider {info.provider!r} has no backend "
                f"named {info.backend_name!r}"
            )
        if named[0] not in eligible:
            raise NoEligibleBackend(
                f"backend {info.backend_name!r} cannot serve this request "
                f"(qubits, status, or type mismatch)"
            )
        return named[0]

    # -- job lifecycle --

    def submit_job(
        self,
        owner: str,
        circuit: Circuit,
        backend: Backend,
        shots: int,
        seed: Optional[int] = None,
        function_name: str = "",
        on_done: Optional[Callable[[Job], None]] = None,
    ) -> Job:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        if circuit.num_qubits > backend.qubits:
            raise CapacityExceeded(
                f"circuit needs {circuit.num_qubits} qubits, "
                f"backend {backend.name} has {backend.qubits}"
            )
        if not backend.operational:
            raise BackendUnavailable(f"backend {backend.name} is not operational")
        if self._closed:
            raise BackendUnavailable("backend manager is shut down")

        job_id = uuid.uuid4().hex
        if seed is None:
            # Reproducibility hook: requests may pin a seed; otherwise one is
            # derived from the platform job id.
            seed = int(job_id[:8], 16)
        job = Job(
            job_id=job_id,
            provider_job_id=f"{backend.provider}-{uuid.uuid4().hex[:12]}",
            owner=owner,
            function_name=function_name,
            backend_name=backend.name,
            shots=shots,
            seed=seed,
            circuit=circuit,
            submit_time=datetime.now(timezone.utc),
        )
        if on_done is not None:
            # Attached before execution can start, so it cannot be missed
            # even though internal backends run inline below.
            job._callbacks.append(on_done)
        with self._lock:
            self.jobs[job.job_id] = job
            backend._pending += 1
        self._notify(job)

        if backend.type is BackendType.INTERNAL_SIMULATOR:
            self._execute(job, backend, delay_seconds=0.0)
        else:
            delay = self._next_delay(backend)
            self._queue_for(backend).put((job, delay))
        return job

    def _next_delay(self, backend: Backend) -> float:
        with self._lock:
            rng = self._delay_rngs.get(backend.name)
            if rng is None:
                rng = random.Random(f"{self._queue_seed}:{backend.name}")
                self._delay_rngs[backend.name] = rng
            jitter = rng.uniform(0, backend.jitter_millis) if backend.jitter_millis else 0.0
            return (backend.queue_delay_millis + jitter) / 1000.0

    def _queue_for(self, backend: Backend) -> "queue.Queue":
        with self._lock:
            q = self._queues.get(backend.name)
            if q is None:
                q = self._queues[backend.name] = queue.Queue()
                worker = threading.Thread(
                    target=self._worker_loop,
                    args=(backend, q),
                    name=f"backend-{backend.name}",
                    daemon=True,
                )
                self._workers[backend.name] = worker
                worker.start()
            return q

    def _worker_loop(self, backend: Backend, q: "queue.Queue") -> None:
        while True:
            item = q.get()
            if item is None:
                return
            job, delay = item
            self._execute(job, backend, delay_seconds=delay)

    def _execute(self, job: Job, backend: Backend, delay_seconds: float) -> None:
        if delay_seconds > 0:
            time.sleep(delay_seconds)
        with self._lock:
            job.status = JobStatus.RUNNING
            job.running_start_time = datetime.now(timezone.utc)
            backend._pending -= 1
        self._notify(job)

        service = backend.service_time.duration_seconds(
            job.shots, len(job.circuit.gates) if job.circuit else 0
        )
        if service > 0:
            time.sleep(service)
        try:
            counts = simulator.run_circuit(job.circuit, job.shots, job.seed)
        except Exception as exc:  # the job records any failure, then ERROR
            with self._lock:
                job.status = JobStatus.ERROR
                job.error = f"{type(exc).__name__}: {exc}"
                job.completion_time = datetime.now(timezone.utc)
                job.total_run_time = self._elapsed(job)
        else:
            with self._lock:
                job.counts = counts
                job.status = JobStatus.DONE
                job.completion_time = datetime.now(timezone.utc)
                job.total_run_time = self._elapsed(job)
        self._finish(job)

    @staticmethod
    def _elapsed(job: Job) -> float:
        delta = job.completion_time - job.running_start_time
        return round(delta.total_seconds(), 3)

    def _finish(self, job: Job) -> None:
        # Run callbacks, persist, then latch. Waiters wake at the latch, so
        # the terminal state (plus whatever callbacks attached) must already
        # be durable by then; a callback that sneaks in mid-persist restarts
        # the drain and persists again.
        while True:
            with self._lock:
                callbacks = list(job._callbacks)
                job._callbacks.clear()
            if callbacks:
                for callback in callbacks:
                    callback(job)
                continue
            self._notify(job)
            with self._lock:
                if not job._callbacks:
                    job._done.set()
                    break

    def _notify(self, job: Job) -> None:
        if self._on_update is not None:
            self._on_update(job)

    # -- queries --

    def get_job(self, job_id: str, requester: str, admin: bool = False) -> Job:
        with self._lock:
            job = self.jobs.get(job_id)
        if job is None:
            raise JobNotFound(f"no job {job_id!r}")
        if not admin and job.owner != requester:
            raise PermissionDenied("jobs are visible to their owner only")
        return job

    def list_jobs(self, requester: str, admin: bool = False) -> List[Job]:
        with self._lock:
            jobs = list(self.jobs.values())
        if not admin:
            jobs = [j for j in jobs if j.owner == requester]
        jobs.sort(key=lambda j: j.submit_time)
        return jobs

    def forget_job(self, job_id: str) -> None:
        with self._lock:
            self.jobs.pop(job_id, None)

    def add_done_callback(self, job: Job, fn: Callable[[Job], None]) -> None:
        with self._lock:
            finished = job._done.is_set()
            if not finished:
                job._callbacks.append(fn)
        if finished:
            fn(job)
            self._notify(job)  # persist whatever the late callback attached

    @staticmethod
    def wait(job: Job, timeout: Optional[float] = None) -> bool:
        """Block until the job completes; True when it did within timeout."""
        return job._done.wait(timeout)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            queues = list(self._queues.values())
        for q in queues:
            q.put(None)
        for worker in self._workers.values():
            worker.join(timeout=5)
