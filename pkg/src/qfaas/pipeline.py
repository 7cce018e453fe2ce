"""Function deployment pipeline.

Deployment follows a fixed stage order: validate caller and name, fetch
the template skeleton (manifest defaults), assemble the function package,
commit it to the versioned package store, build (parse the source and
resolve processors), write the content-addressed registry entry, warm the
replica pool, publish the endpoint.  A failed build leaves the record in
FAILED with its diagnostics; a failed update leaves the previous version
serving.

"Containerization" here means content-addressed package snapshots plus
replica pools; the stages and their ordering are what matter.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import io
import json
import tarfile
import threading
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple

from . import builtins as bi
from . import plugins
from .auth import Role, User, role_at_least
from .config import PlatformConfig
from .errors import (
    BuildError,
    FunctionNameError,
    FunctionNotFound,
    FunctionNotReady,
    LimitExceeded,
    PermissionDenied,
    QfaasError,
)
from .ir import CircuitTemplate, DialectTag, TemplateKind, parse_template
from .plugins import PluginStage
from .replicas import FunctionVersion, ReplicaPool
from .store import DocumentStore

FUNCTIONS = "functions"
PACKAGES = "function_packages"
REGISTRY = "registry"

DEFAULT_PRE = "identity"
DEFAULT_POST = "most_frequent"

_BUILTIN_TEMPLATES = {
    "qrng": TemplateKind.BUILTIN_QRNG,
    "dj": TemplateKind.BUILTIN_DJ,
    "shor": TemplateKind.BUILTIN_SHOR,
}

_TEMPLATE_DEFAULT_POST = {
    "qrng": "most_frequent",
    "dj": "most_frequent",
    "shor": "shor_factors",
}


class FunctionStatus(str, enum.Enum):
    BUILDING = "BUILDING"
    DEPLOYED = "DEPLOYED"
    FAILED = "FAILED"
    DELETING = "DELETING"


def fn_name_check(name: str) -> bool:
    """DNS-label style: ^[a-z][a-z0-9-]{0,62}$ (implemented without re)."""
    if not isinstance(name, str) or not 1 <= len(name) <= 63:
        return False
    if not "a" <= name[0] <= "z":
        return False
    for ch in name[1:]:
        if not ("a" <= ch <= "z" or "0" <= ch <= "9" or ch == "-"):
            return False
    return True


def build_package(manifest: Dict[str, Any], source: str) -> bytes:
    """Deterministic uncompressed tar: manifest.json + function.qir.

    All archive metadata is pinned so identical content always hashes to
    the identical digest.
    """
    payload = io.BytesIO()
    members = (
        ("manifest.json", json.dumps(manifest, indent=2, sort_keys=True).encode()),
        ("function.qir", source.encode("utf-8")),
    )
    with tarfile.open(fileobj=payload, mode="w") as archive:
        for name, data in members:
            info = tarfile.TarInfo(name)
            info.size = len(data)
            info.mtime = 0
            info.uid = info.gid = 0
            info.uname = info.gname = ""
            info.mode = 0o644
            archive.addfile(info, io.BytesIO(data))
    return payload.getvalue()


def image_digest(package: bytes) -> str:
    return "sha256:" + hashlib.sha256(package).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(sep=" ", timespec="microseconds")


def _derive_kind(config: Dict[str, Any]) -> Optional[TemplateKind]:
    """config["template"] names a builtin; absent means infer from source."""
    chosen = config.get("template")
    if chosen is None:
        return None
    kind = _BUILTIN_TEMPLATES.get(chosen)
    if kind is None:
        raise BuildError(
            f"unknown builtin template {chosen!r}; "
            f"choose one of {sorted(_BUILTIN_TEMPLATES)}"
        )
    return kind


class FunctionManager:
    """Owns function records, package history, registry, and replica pools."""

    def __init__(self, store: DocumentStore, config: PlatformConfig):
        self._store = store
        self._config = config
        self._glock = threading.Lock()
        self._name_locks: Dict[str, threading.Lock] = {}
        self._pools: Dict[str, ReplicaPool] = {}
        self._restore()

    def _lock_for(self, name: str) -> threading.Lock:
        with self._glock:
            return self._name_locks.setdefault(name, threading.Lock())

    def _restore(self) -> None:
        """Rebuild replica pools for functions that were serving at shutdown."""
        for doc in self._store.query(FUNCTIONS):
            record = doc.body
            name = record["name"]
            status = record["status"]
            if status == FunctionStatus.DELETING.value:
                self._store.delete(FUNCTIONS, name)
                continue
            if status == FunctionStatus.BUILDING.value:
                record["status"] = FunctionStatus.FAILED.value
                record["build_log"].append("build interrupted by restart")
                self._store.put(FUNCTIONS, name, record)
                continue
            if status != FunctionStatus.DEPLOYED.value:
                continue
            try:
                version = self._version_from_record(record)
            except QfaasError as exc:
                record["status"] = FunctionStatus.FAILED.value
                record["build_log"].append(f"restore failed: {exc.message}")
                self._store.put(FUNCTIONS, name, record)
                continue
            self._pools[name] = self._new_pool(version, record["replicas"])

    def _version_from_record(self, record: Dict[str, Any]) -> FunctionVersion:
        template = parse_template(
            record["source"], record["dialect_tag"], record["kind"]
        )
        return FunctionVersion(
            name=record["name"],
            version=record["version"],
            template=template,
            config=dict(record["config"]),
            pre_processor=record["processors"]["pre"],
            post_processor=record["processors"]["post"],
            image_digest=record["image_digest"],
        )

    def _new_pool(self, version: FunctionVersion, count: int) -> ReplicaPool:
        return ReplicaPool(
            version,
            count,
            cold_start_millis=self._config.cold_start_millis,
            overhead_millis=self._config.replica_overhead_millis,
        )

    # -- build stages ----------------------------------------------------

    def _build_version(
        self,
        name: str,
        version: int,
        source: str,
        dialect_tag: str,
        processors: Dict[str, str],
        config: Dict[str, Any],
        log: List[str],
    ) -> Tuple[FunctionVersion, bytes, str]:
        """Package, commit, build, and register one function version."""
        try:
            kind = _derive_kind(config)
            template = parse_template(source, dialect_tag, kind)
        except QfaasError as exc:
            if isinstance(exc, BuildError):
                raise
            log.append(f"parse failed: {exc.message}")
            raise BuildError(f"parse failed: {exc.message}", detail=exc.detail)

        manifest = {
            "name": name,
            "dialectTag": DialectTag(dialect_tag).value,
            "processors": dict(processors),
            "config": dict(config),
            "declaredParams": list(template.declared_params),
        }
        package = build_package(manifest, source)
        digest = image_digest(package)
        log.append(f"packaged {len(package)} bytes, digest {digest[:19]}...")

        commit_id = f"{name}@{version}+{digest[7:19]}"
        self._store.put(
            PACKAGES,
            commit_id,
            {
                "name": name,
                "version": version,
                "manifest": manifest,
                "source": source,
                "image_digest": digest,
                "committed_at": _now(),
            },
        )
        log.append(f"committed package {commit_id}")

        try:
            plugins.get_plugin(processors["pre"], PluginStage.PRE)
            plugins.get_plugin(processors["post"], PluginStage.POST)
            bi.validate_builtin_config(template.kind.value, config)
        except QfaasError as exc:
            log.append(f"build failed: {exc.message}")
            raise BuildError(exc.message, detail=exc.detail)
        except ValueError as exc:
            log.append(f"build failed: {exc}")
            raise BuildError(str(exc))

        # Registry entries are immutable: first write wins, re-pushes of the
        # same digest are no-ops.
        try:
            self._store.get(REGISTRY, digest)
        except QfaasError:
            self._store.put(
                REGISTRY,
                digest,
                {
                    "image_digest": digest,
                    "package_bytes": base64.b64encode(package).decode("ascii"),
                    "built_at": _now(),
                },
            )
        log.append(f"pushed image {digest[:19]}... to registry")

        return (
            FunctionVersion(
                name=name,
                version=version,
                template=template,
                config=dict(config),
                pre_processor=processors["pre"],
                post_processor=processors["post"],
                image_digest=digest,
            ),
            package,
            digest,
        )

    # -- operations --------------------------------------------------------

    def create_function(
        self,
        caller: User,
        name: str,
        template_source: str,
        dialect_tag: str = "qiskit",
        processors: Optional[Dict[str, str]] = None,
        config: Optional[Dict[str, Any]] = None,
        replicas: int = 1,
    ) -> Tuple[Dict[str, Any], str]:
        if not role_at_least(caller.role, Role.ENGINEER):
            raise PermissionDenied("creating functions requires the engineer role")
        if not fn_name_check(name):
            raise FunctionNameError(
                f"invalid function name {name!r}: must match [a-z][a-z0-9-]*, "
                "at most 63 characters"
            )
        if not 0 <= replicas <= self._config.max_replicas:
            raise LimitExceeded(
                f"replicas must be within 0..{self._config.max_replicas}"
            )
        try:
            dialect_tag = DialectTag(dialect_tag).value
        except ValueError:
            raise BuildError(f"unknown dialect tag {dialect_tag!r}") from None
        config = dict(config or {})
        # Builtin templates carry their natural post stage; an explicit
        # processors.post still wins.
        default_post = _TEMPLATE_DEFAULT_POST.get(config.get("template"), DEFAULT_POST)
        processors = {
            "pre": (processors or {}).get("pre") or DEFAULT_PRE,
            "post": (processors or {}).get("post") or default_post,
        }

        with self._lock_for(name):
            if self._record_or_none(name) is not None:
                raise FunctionNameError(f"function name {name!r} is already in use")

            log: List[str] = [f"validated name {name!r}"]
            record = {
                "name": name,
                "author": caller.id,
                "source": template_source,
                "dialect_tag": dialect_tag,
                "kind": None,
                "declared_params": [],
                "processors": processors,
                "config": config,
                "image_digest": None,
                "replicas": replicas,
                "endpoint": f"/function/{name}",
                "status": FunctionStatus.BUILDING.value,
                "version": 1,
                "created_at": _now(),
                "updated_at": _now(),
                "build_log": log,
            }
            self._store.put(FUNCTIONS, name, record)

            try:
                version, _package, digest = self._build_version(
                    name, 1, template_source, dialect_tag, processors, config, log
                )
            except BuildError as exc:
                record["status"] = FunctionStatus.FAILED.value
                record["updated_at"] = _now()
                self._store.put(FUNCTIONS, name, record)
                raise exc

            self._pools[name] = self._new_pool(version, replicas)
            log.append(f"deployed {replicas} replica(s)")
            record.update(
                kind=version.template.kind.value,
                declared_params=list(version.template.declared_params),
                image_digest=digest,
                status=FunctionStatus.DEPLOYED.value,
                updated_at=_now(),
            )
            log.append(f"published endpoint {record['endpoint']}")
            self._store.put(FUNCTIONS, name, record)
            return record, record["endpoint"]

    def update_function(
        self, caller: User, name: str, new_package: Dict[str, Any]
    ) -> Dict[str, Any]:
        with self._lock_for(name):
            record = self._get_record(name)
            self._require_author_or_admin(caller, record)

            source = new_package.get("source", record["source"])
            dialect_tag = new_package.get("dialect_tag", record["dialect_tag"])
            processors = {
                **record["processors"],
                **new_package.get("processors", {}),
            }
            config = new_package.get("config", record["config"])
            next_version = record["version"] + 1
            log = list(record["build_log"])
            log.append(f"building version {next_version}")

            # A build failure must leave the serving version untouched.
            version, _package, digest = self._build_version(
                name, next_version, source, dialect_tag, processors, config, log
            )

            new_pool = self._new_pool(version, record["replicas"])
            log.append(
                f"version {next_version} ready with {record['replicas']} replica(s), "
                "retiring previous replicas"
            )
            self._pools[name] = new_pool  # atomic switchover point

            record.update(
                source=source,
                dialect_tag=DialectTag(dialect_tag).value,
                kind=version.template.kind.value,
                declared_params=list(version.template.declared_params),
                processors=processors,
                config=dict(config),
                image_digest=digest,
                status=FunctionStatus.DEPLOYED.value,
                version=next_version,
                updated_at=_now(),
                build_log=log,
            )
            self._store.put(FUNCTIONS, name, record)
            return record

    def delete_function(self, caller: User, name: str) -> Dict[str, Any]:
        with self._lock_for(name):
            record = self._get_record(name)
            self._require_author_or_admin(caller, record)
            record["status"] = FunctionStatus.DELETING.value
            record["updated_at"] = _now()
            self._store.put(FUNCTIONS, name, record)
            # Unpublish: new invocations now miss; in-flight sessions keep
            # their replica references and complete.
            self._pools.pop(name, None)
            self._store.delete(FUNCTIONS, name)
            return {"deleted": name}

    def scale_function(
        self, caller: User, name: str, replicas: int
    ) -> Dict[str, Any]:
        if not 0 <= replicas <= self._config.max_replicas:
            raise LimitExceeded(
                f"replicas must be within 0..{self._config.max_replicas}"
            )
        with self._lock_for(name):
            record = self._get_record(name)
            self._require_author_or_admin(caller, record)
            pool = self._pools.get(name)
            if pool is None:
                raise FunctionNotReady(f"function {name!r} has no serving version")
            pool.scale(replicas)
            record["replicas"] = replicas
            record["updated_at"] = _now()
            self._store.put(FUNCTIONS, name, record)
            return record

    # -- queries -----------------------------------------------------------

    def _record_or_none(self, name: str) -> Optional[Dict[str, Any]]:
        try:
            return self._store.get(FUNCTIONS, name).body
        except QfaasError:
            return None

    def _get_record(self, name: str) -> Dict[str, Any]:
        record = self._record_or_none(name)
        if record is None:
            raise FunctionNotFound(f"no function named {name!r}")
        return record

    def _require_author_or_admin(self, caller: User, record: Dict[str, Any]) -> None:
        if not role_at_least(caller.role, Role.ENGINEER):
            raise PermissionDenied("modifying functions requires the engineer role")
        if not caller.is_admin and record["author"] != caller.id:
            raise PermissionDenied(
                "only the author or an administrator may modify this function"
            )

    def get_function(self, name: str) -> Dict[str, Any]:
        record = self._get_record(name)
        pool = self._pools.get(name)
        record["active_replicas"] = pool.size if pool else 0
        return record

    def list_functions(self) -> List[Dict[str, Any]]:
        return [self.get_function(d.body["name"]) for d in self._store.query(FUNCTIONS)]

    def pool_for(self, name: str) -> ReplicaPool:
        pool = self._pools.get(name)
        if pool is None:
            record = self._record_or_none(name)
            if record is None:
                raise FunctionNotFound(f"no function named {name!r}")
            raise FunctionNotReady(
                f"function {name!r} is {record['status']}, not serving"
            )
        return pool

    def read_registry(self, digest: str) -> bytes:
        doc = self._store.get(REGISTRY, digest)
        return base64.b64decode(doc.body["package_bytes"])

    def stats(self) -> Dict[str, Any]:
        out = {}
        for name, pool in sorted(self._pools.items()):
            out[name] = pool.stats()
        return out
