"""QFaaS: a self-contained Function-as-a-Service platform for hybrid
quantum-classical functions, with an embedded statevector simulator,
mock quantum cloud providers, an authenticated REST gateway, and a CLI.
"""

__version__ = "1.0.0"

from .auth import Role, User, UserRegistry
from .backends import (
    Backend,
    BackendInfo,
    BackendManager,
    BackendType,
    Job,
    JobStatus,
    estimate_cost,
    get_least_busy,
    load_catalog,
)
from .config import PlatformConfig
from .errors import QfaasError
from .invocation import InvocationEngine, InvocationRequest, parse_invocation_request
from .ir import Circuit, CircuitTemplate, DialectTag, TemplateKind, instantiate, parse_template, render
from .pipeline import FunctionManager, build_package, fn_name_check, image_digest
from .platform import Platform
from .replicas import ReplicaPool
from .simulator import (
    Counts,
    Gate,
    GateKind,
    StateVector,
    apply_gate,
    final_state,
    new_state,
    run_circuit,
    sample_counts,
    single_qubit_unitary,
)
from .store import Document, DocumentStore

__all__ = [
    "__version__",
    "Backend",
    "BackendInfo",
    "BackendManager",
    "BackendType",
    "Circuit",
    "CircuitTemplate",
    "Counts",
    "DialectTag",
    "Document",
    "DocumentStore",
    "FunctionManager",
    "Gate",
    "GateKind",
    "InvocationEngine",
    "InvocationRequest",
    "Job",
    "JobStatus",
    "Platform",
    "PlatformConfig",
    "QfaasError",
    "ReplicaPool",
    "Role",
    "StateVector",
    "TemplateKind",
    "User",
    "UserRegistry",
    "apply_gate",
    "build_package",
    "estimate_cost",
    "final_state",
    "fn_name_check",
    "get_least_busy",
    "image_digest",
    "instantiate",
    "load_catalog",
    "new_state",
    "parse_invocation_request",
    "parse_template",
    "render",
    "run_circuit",
    "sample_counts",
    "single_qubit_unitary",
]
