"""Platform assembly.

Wires persistence, users, backends, the deployment pipeline, and the
invocation engine into one object the gateway and CLI both drive.  The jobs
collection is the durable record and survives restarts: external jobs are
persisted on every state transition, inline internal jobs only at their
terminal state (the intermediate states exist for microseconds inside a
single call and a crash before DONE leaves nothing worth resuming).
"""

from __future__ import annotations

import time
from typing import Any, Dict, List, Optional

from .auth import Role, User, UserRegistry
from .backends import BackendManager, BackendType, Job, JobStatus, load_catalog
from .config import PlatformConfig
from .errors import JobNotFound, PermissionDenied, QfaasError
from .invocation import InvocationEngine
from .pipeline import FunctionManager
from .store import DocumentStore

JOBS = "jobs"

DEFAULT_ADMIN_USERNAME = "admin"


class Platform:
    """One running platform instance over one data directory."""

    def __init__(self, config: Optional[PlatformConfig] = None):
        self.config = config or PlatformConfig()
        self.store = DocumentStore(self.config.data_dir)
        self.users = UserRegistry(self.store)
        catalog = (
            load_catalog(self.config.catalog_path)
            if self.config.catalog_path is not None
            else None
        )
        self.backends = BackendManager(
            catalog,
            queue_seed=self.config.queue_seed,
            on_update=self._persist_job,
        )
        self.functions = FunctionManager(self.store, self.config)
        self.engine = InvocationEngine(
            self.config, self.functions, self.backends, self.users
        )
        self.started_at = time.time()
        self.admin_created = False
        self.admin = self._bootstrap_admin()

    def _bootstrap_admin(self) -> User:
        """Guarantee an administrator; first boot mints one."""
        admins = [u for u in self.users.list_users() if u.role is Role.ADMINISTRATOR]
        if admins:
            return admins[0]
        self.admin_created = True
        return self.users.create_user(
            DEFAULT_ADMIN_USERNAME,
            Role.ADMINISTRATOR,
            token=self.config.admin_token,
        )

    def _persist_job(self, job: Job) -> None:
        if job.status not in (JobStatus.DONE, JobStatus.ERROR):
            backend = self.backends.backends.get(job.backend_name)
            if backend is not None and backend.type is BackendType.INTERNAL_SIMULATOR:
                return
        self.store.put(JOBS, job.job_id, job.to_doc())

    # -- jobs (durable view) ---------------------------------------------

    def get_job_doc(self, job_id: str, requester: User) -> Dict[str, Any]:
        try:
            doc = self.store.get(JOBS, job_id).body
        except QfaasError:
            raise JobNotFound(f"no job {job_id!r}")
        if not requester.is_admin and doc["owner"] != requester.id:
            raise PermissionDenied("jobs are visible to their owner only")
        return doc

    def list_job_docs(self, requester: User) -> List[Dict[str, Any]]:
        docs = [d.body for d in self.store.query(JOBS)]
        if not requester.is_admin:
            docs = [d for d in docs if d["owner"] == requester.id]
        docs.sort(key=lambda d: (d["submit_time"] or "", d["job_id"]))
        return docs

    def delete_job(self, job_id: str, requester: User) -> Dict[str, Any]:
        self.get_job_doc(job_id, requester)  # existence + ownership
        self.store.delete(JOBS, job_id)
        self.backends.forget_job(job_id)
        return {"deleted": job_id}

    # -- monitoring ---------------------------------------------------------

    def system_status(self) -> Dict[str, Any]:
        job_docs = [d.body for d in self.store.query(JOBS)]
        by_status: Dict[str, int] = {}
        for doc in job_docs:
            by_status[doc["status"]] = by_status.get(doc["status"], 0) + 1
        return {
            "uptime_seconds": round(time.time() - self.started_at, 3),
            "functions": self.functions.stats(),
            "invocations": self.engine.stats(),
            "backends": [
                self.backends.backends[name].to_doc()
                for name in sorted(self.backends.backends)
            ],
            "jobs": {"total": len(job_docs), "by_status": by_status},
        }

    def close(self) -> None:
        self.backends.close()
