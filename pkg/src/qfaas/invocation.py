"""Invocation engine.

One invocation runs end to end on a replica session: pre-process the
input, instantiate the circuit, resolve the caller's provider credential,
select a backend, submit, and either block for the post-processed result
or hand back the job id.  Post-processing runs as a job-completion
callback so deferred (waitForResult=false) invocations still get their
results attached for later retrieval.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from . import ir, plugins
from .auth import User, UserRegistry
from .backends import (
    BackendInfo,
    BackendManager,
    BackendType,
    Job,
    JobStatus,
    format_timestamp,
)
from .config import PlatformConfig
from .errors import JobExecutionError, QfaasError, ValidationError
from .pipeline import FunctionManager

# Request "type" values; "simulator" is shorthand covering both simulator
# flavors.
_TYPE_ALIASES: Dict[str, Tuple[str, ...]] = {
    "simulator": (
        BackendType.INTERNAL_SIMULATOR.value,
        BackendType.EXTERNAL_SIMULATOR.value,
    ),
    BackendType.INTERNAL_SIMULATOR.value: (BackendType.INTERNAL_SIMULATOR.value,),
    BackendType.EXTERNAL_SIMULATOR.value: (BackendType.EXTERNAL_SIMULATOR.value,),
    BackendType.QPU.value: (BackendType.QPU.value,),
}

DEFAULT_SHOTS = 1024


@dataclass
class InvocationRequest:
    """Normalized invocation request; see parse_invocation_request."""

    input: Any = None
    provider: Optional[str] = None
    shots: int = DEFAULT_SHOTS
    wait_for_result: bool = True
    seed: Optional[int] = None
    autoselect: bool = True
    types: Tuple[str, ...] = ()
    backend_name: Optional[str] = None
    internal: Optional[bool] = None
    hub: Optional[str] = None
    api_token: Optional[str] = None


def _pick(mapping: Mapping[str, Any], *names: str, default: Any = None) -> Any:
    for name in names:
        if name in mapping:
            return mapping[name]
    return default


def parse_invocation_request(body: Optional[Mapping[str, Any]]) -> InvocationRequest:
    """Accepts both camelCase and snake_case spellings of every field.

    backendInfo.device / backendName / backend_name are synonyms; an inline
    api_token overrides the caller's stored provider credential.
    """
    if body is None:
        body = {}
    if not isinstance(body, Mapping):
        raise ValidationError("request body must be a JSON object")

    shots = _pick(body, "shots", default=DEFAULT_SHOTS)
    if isinstance(shots, bool) or not isinstance(shots, int) or shots < 1:
        raise ValidationError("shots must be an integer >= 1")

    wait = _pick(body, "waitForResult", "wait_for_result", default=True)
    if not isinstance(wait, bool):
        raise ValidationError("waitForResult must be a boolean")

    seed = _pick(body, "seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ValidationError("seed must be an integer")

    provider = _pick(body, "provider")
    if provider is not None and not isinstance(provider, str):
        raise ValidationError("provider must be a string")

    info = _pick(body, "backendInfo", "backend_info", default={})
    if not isinstance(info, Mapping):
        raise ValidationError("backendInfo must be a JSON object")

    backend_name = _pick(info, "backendName", "backend_name", "device")
    if backend_name is not None and not isinstance(backend_name, str):
        raise ValidationError("backendName must be a string")

    autoselect = _pick(info, "autoselect")
    if autoselect is None:
        autoselect = backend_name is None
    if not isinstance(autoselect, bool):
        raise ValidationError("autoselect must be a boolean")

    raw_types = _pick(info, "type", "types")
    if raw_types is None:
        raw_types = []
    elif isinstance(raw_types, str):
        raw_types = [raw_types]
    elif not isinstance(raw_types, (list, tuple)):
        raise ValidationError("backendInfo.type must be a string or list")
    types = []
    for entry in raw_types:
        expansion = _TYPE_ALIASES.get(entry)
        if expansion is None:
            raise ValidationError(
                f"unknown backend type {entry!r}; "
                f"expected one of {sorted(_TYPE_ALIASES)}"
            )
        types.extend(expansion)

    internal = _pick(info, "internal")
    if internal is not None and not isinstance(internal, bool):
        raise ValidationError("backendInfo.internal must be a boolean")

    api_token = _pick(info, "apiToken", "api_token")
    if api_token is not None and not isinstance(api_token, str):
        raise ValidationError("api_token must be a string")

    hub = _pick(info, "hub")
    if hub is not None and not isinstance(hub, str):
        raise ValidationError("hub must be a string")

    return InvocationRequest(
        input=_pick(body, "input"),
        provider=provider,
        shots=shots,
        wait_for_result=wait,
        seed=seed,
        autoselect=autoselect,
        types=tuple(dict.fromkeys(types)),
        backend_name=backend_name,
        internal=internal,
        hub=hub,
        api_token=api_token or None,
    )


class InvocationEngine:
    """Executes invocations against deployed functions."""

    def __init__(
        self,
        config: PlatformConfig,
        functions: FunctionManager,
        backends: BackendManager,
        users: UserRegistry,
    ):
        self._config = config
        self._functions = functions
        self._backends = backends
        self._users = users
        self._lock = threading.Lock()
        self._totals: Dict[str, int] = {}

    def invoke(
        self,
        caller: User,
        function_name: str,
        body: Optional[Mapping[str, Any]] = None,
        request: Optional[InvocationRequest] = None,
    ) -> Dict[str, Any]:
        if request is None:
            request = parse_invocation_request(body)
        pool = self._functions.pool_for(function_name)

        # The replica is held for the whole invocation, like a function pod
        # serving one request end to end.
        with pool.session() as replica:
            version = replica.version
            context: Dict[str, Any] = {
                "max_qubits": self._config.max_qubits,
                "config": version.config,
                "function": function_name,
            }
            processed = plugins.pre_process(
                version.pre_processor, request.input, context
            )
            circuit = ir.instantiate(
                version.template,
                processed,
                config=version.config,
                max_qubits=self._config.max_qubits,
            )
            context["circuit"] = circuit

            provider = (
                request.provider or version.config.get("provider") or "internal"
            )
            internal = (
                request.internal
                if request.internal is not None
                else provider == "internal"
            )
            credential = request.api_token or self._users.get_credential(
                caller, provider
            )
            info = BackendInfo(
                provider=provider,
                autoselect=request.autoselect,
                types=request.types,
                backend_name=request.backend_name,
                internal=internal,
            )
            backend = self._backends.backend_selection(
                circuit.num_qubits, info, credential
            )

            post_name = version.post_processor

            def post(job: Job) -> None:
                if job.status is not JobStatus.DONE or job.counts is None:
                    return
                try:
                    payload = dict(
                        plugins.post_process(post_name, job.counts, context)
                    )
                except QfaasError as exc:
                    job.post_error = exc
                    job.error = f"{exc.code}: {exc.message}"
                    return
                job.result = payload.pop("result")
                job.post_detail = payload

            job = self._backends.submit_job(
                caller.id,
                circuit,
                backend,
                request.shots,
                seed=request.seed,
                function_name=function_name,
                on_done=post,
            )
            self._count(function_name)

            if not request.wait_for_result:
                return {"job_id": job.job_id, "backend_device": backend.name}

            finished = BackendManager.wait(
                job, timeout=self._config.wait_timeout_seconds
            )
            if not finished:
                # Wait expired: hand back the job id; the result stays
                # retrievable through the jobs API.
                return {"job_id": job.job_id, "backend_device": backend.name}

            if job.status is JobStatus.ERROR:
                raise JobExecutionError(job.error or "job failed")
            if job.post_error is not None:
                raise job.post_error
            return job_response(job)

    def _count(self, function_name: str) -> None:
        with self._lock:
            self._totals[function_name] = self._totals.get(function_name, 0) + 1

    def stats(self) -> Dict[str, Any]:
        with self._lock:
            per_function = dict(sorted(self._totals.items()))
        return {"total": sum(per_function.values()), "per_function": per_function}


def job_response(job: Job) -> Dict[str, Any]:
    """Full invocation response: result, backend_device, detail."""
    provider_info = {
        "shots": job.shots,
        "job_id": job.job_id,
        "job_status": job.status.value,
        "running_start_time": format_timestamp(job.running_start_time),
        "completion_time": format_timestamp(job.completion_time),
        "total_run_time": job.total_run_time,
    }
    detail: Dict[str, Any] = {"provider_info": provider_info}
    if job.post_detail:
        detail.update(job.post_detail)
    return {
        "result": job.result,
        "backend_device": job.backend_name,
        "detail": detail,
    }
