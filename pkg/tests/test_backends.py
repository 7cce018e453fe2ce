import threading
import time
from decimal import Decimal

import pytest

from qfaas import backends as be
from qfaas import simulator as sim
from qfaas.errors import (
    BackendNotFound,
    CapacityExceeded,
    EmptyList,
    NoEligibleBackend,
    PermissionDenied,
    ProviderAuthError,
    ProviderNotFound,
)
from qfaas.ir import Circuit


def bell_circuit():
    return Circuit(2, (sim.h(0), sim.cx(0, 1)), (0, 1))


def make_backend(name, provider="p", type_=be.BackendType.EXTERNAL_SIMULATOR,
                 qubits=10, operational=True, pending=0):
    backend = be.Backend(name=name, provider=provider, type=type_,
                         qubits=qubits, operational=operational)
    backend._pending = pending
    return backend


def test_default_catalog_loads():
    catalog = be.load_catalog()
    names = {entry["name"] for entry in catalog}
    assert "internal_simulator" in names
    assert "rigetti_m1" in names
    assert len(catalog) == 9
    # floats in the file become Decimal, never binary floats
    rigetti = next(e for e in catalog if e["name"] == "rigetti_m1")
    assert isinstance(rigetti["perShotPrice"], Decimal)


def test_get_least_busy_prefers_shortest_queue_then_name():
    a = make_backend("alpha", pending=2)
    b = make_backend("beta", pending=1)
    assert be.get_least_busy([a, b]).name == "beta"
    b._pending = 2
    assert be.get_least_busy([a, b]).name == "alpha"  # tie -> lexicographic
    with pytest.raises(EmptyList):
        be.get_least_busy([])


def test_estimate_cost_decimal_exact():
    backend = make_backend("x")
    backend.per_task_price = Decimal("0.30000")
    backend.per_shot_price = Decimal("0.00035")
    assert be.estimate_cost(backend, 1, 10000) == Decimal("3.80")
    assert str(be.estimate_cost(backend, 1, 10000)) == "3.80"
    with pytest.raises(ValueError):
        be.estimate_cost(backend, 0, 10)
    with pytest.raises(ValueError):
        be.estimate_cost(backend, 1, -1)


@pytest.fixture
def manager():
    m = be.BackendManager(queue_seed=7)
    yield m
    m.close()


def test_internal_selection_ignores_qubit_filter(manager):
    info = be.BackendInfo(provider="internal", internal=True)
    backend = manager.backend_selection(4, info)
    assert backend.name == "internal_simulator"


def test_internal_selection_named_must_be_internal(manager):
    info = be.BackendInfo(provider="internal", internal=True, backend_name="ibm_cairo")
    with pytest.raises(BackendNotFound):
        manager.backend_selection(2, info)


def test_unknown_provider(manager):
    info = be.BackendInfo(provider="nope", internal=False)
    with pytest.raises(ProviderNotFound):
        manager.backend_selection(2, info)


def test_external_requires_credential(manager):
    info = be.BackendInfo(provider="ibmq", internal=False, autoselect=True)
    with pytest.raises(ProviderAuthError):
        manager.backend_selection(2, info)
    backend = manager.backend_selection(2, info, credential="tok")
    assert backend.provider == "ibmq"


def test_autoselect_filters_and_picks_least_busy(manager):
    info = be.BackendInfo(
        provider="braket", internal=False, autoselect=True, types=("qpu",)
    )
    backend = manager.backend_selection(9, info, credential="tok")
    # 9 qubits rules out oqc_lucy (8); all queues empty -> lexicographic.
    assert backend.name == "dwave_2000q"


def test_autoselect_no_match(manager):
    info = be.BackendInfo(
        provider="ibmq", internal=False, autoselect=True,
        types=("external_simulator",),
    )
    with pytest.raises(NoEligibleBackend):
        manager.backend_selection(33, info, credential="tok")


def test_named_backend_eligibility(manager):
    ok = be.BackendInfo(provider="ibmq", internal=False, autoselect=False,
                        backend_name="ibm_cairo")
    assert manager.backend_selection(27, ok, credential="tok").name == "ibm_cairo"
    with pytest.raises(NoEligibleBackend):
        manager.backend_selection(28, ok, credential="tok")  # too many qubits
    missing = be.BackendInfo(provider="ibmq", internal=False, autoselect=False,
                             backend_name="nope")
    with pytest.raises(BackendNotFound):
        manager.backend_selection(2, missing, credential="tok")


def test_submit_internal_completes_inline(manager):
    backend = manager.backends["internal_simulator"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=256)
    assert job.status is be.JobStatus.DONE
    assert sum(job.counts.values()) == 256
    assert set(job.counts) <= {"00", "11"}
    assert job.submit_time <= job.running_start_time <= job.completion_time
    assert job.total_run_time is not None and job.total_run_time >= 0


def test_seed_derived_from_job_id_when_omitted(manager):
    backend = manager.backends["internal_simulator"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=16)
    assert job.seed == int(job.job_id[:8], 16)
    pinned = manager.submit_job("alice", bell_circuit(), backend, shots=16, seed=5)
    assert pinned.seed == 5


def test_capacity_exceeded(manager):
    backend = manager.backends["oqc_lucy"]  # 8 qubits
    big = Circuit(9, tuple(sim.h(q) for q in range(9)), tuple(range(9)))
    with pytest.raises(CapacityExceeded):
        manager.submit_job("alice", big, backend, shots=1)


def test_external_job_lifecycle(manager):
    backend = manager.backends["ibmq_qasm_simulator"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=64)
    assert backend.queue_length == 1
    assert job.status in (be.JobStatus.QUEUED, be.JobStatus.RUNNING)
    assert manager.wait(job, timeout=10)
    assert job.status is be.JobStatus.DONE
    assert backend.queue_length == 0
    # queue delay honored: runner started at least the base delay later
    delta = (job.running_start_time - job.submit_time).total_seconds()
    assert delta >= backend.queue_delay_millis / 1000.0


def test_queue_delay_is_seeded(manager):
    one = be.BackendManager(queue_seed=7)
    two = be.BackendManager(queue_seed=7)
    backend_name = "ibmq_qasm_simulator"
    try:
        d1 = one._next_delay(one.backends[backend_name])
        d2 = two._next_delay(two.backends[backend_name])
        assert d1 == d2
    finally:
        one.close()
        two.close()


def test_job_visibility(manager):
    backend = manager.backends["internal_simulator"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=8)
    assert manager.get_job(job.job_id, "alice").job_id == job.job_id
    with pytest.raises(PermissionDenied):
        manager.get_job(job.job_id, "bob")
    assert manager.get_job(job.job_id, "bob", admin=True).job_id == job.job_id
    manager.submit_job("bob", bell_circuit(), backend, shots=8)
    assert len(manager.list_jobs("alice")) == 1
    assert len(manager.list_jobs("bob", admin=True)) == 2


def test_error_path_records_failure(manager, monkeypatch):
    def boom(circuit, shots, seed):
        raise RuntimeError("simulated device failure")

    monkeypatch.setattr(be.simulator, "run_circuit", boom)
    backend = manager.backends["internal_simulator"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=8)
    assert job.status is be.JobStatus.ERROR
    assert "simulated device failure" in job.error
    assert job.total_run_time is not None


def test_on_done_callback_and_late_subscriber(manager):
    backend = manager.backends["internal_simulator"]
    seen = []
    job = manager.submit_job(
        "alice", bell_circuit(), backend, shots=8, on_done=lambda j: seen.append("inline")
    )
    assert seen == ["inline"]  # internal runs inline; callback already fired
    manager.add_done_callback(job, lambda j: seen.append("late"))
    assert seen == ["inline", "late"]


def test_status_transitions_observed_in_order(manager):
    transitions = []
    manager._on_update = lambda job: transitions.append(job.status.value)
    backend = manager.backends["ibm_cairo"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=16)
    assert manager.wait(job, timeout=10)
    # observer sees QUEUED then RUNNING then DONE, each at least once
    order = [transitions.index(s) for s in ("QUEUED", "RUNNING", "DONE")]
    assert order == sorted(order)


def test_job_to_doc_round_trippable(manager):
    backend = manager.backends["internal_simulator"]
    job = manager.submit_job("alice", bell_circuit(), backend, shots=8, seed=3)
    doc = job.to_doc()
    assert doc["job_id"] == job.job_id
    assert doc["status"] == "DONE"
    assert doc["shots"] == 8
    assert doc["seed"] == 3
    assert isinstance(doc["counts"], dict)
    assert "+00:00" in doc["completion_time"]
