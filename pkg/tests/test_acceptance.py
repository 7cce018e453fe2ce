"""End-to-end acceptance suite.

One test per shipped guarantee, named so the verbose report reads as a
checklist.  Tolerances are pinned here and nowhere else; anything looser
belongs in the module tests.
"""

import json
import math
import random
import socket
import subprocess
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

import oracles
from conftest import deploy_builtin
from qfaas import Platform, PlatformConfig, Role, backends as be, simulator as sim
from qfaas import builtins as bi
from qfaas.auth import role_at_least
from qfaas.errors import QfaasError
from qfaas.gateway import ROUTE_TABLE, create_app
from qfaas.store import FAULT_POINTS, DocumentStore, StorageError

REPO_ROOT = Path(__file__).resolve().parent.parent


# -- 1. simulator agrees with an explicit Kronecker-product oracle ---------------

def _random_gate(rng, n):
    kind = rng.choice(["u", "h", "x", "y", "z", "p", "cx", "cp", "swap", "perm"])
    qubits = rng.sample(range(n), k=min(n, 3))
    if kind == "u":
        return sim.u(rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi),
                     rng.uniform(0, 2 * math.pi), qubits[0])
    if kind == "p":
        return sim.p(rng.uniform(0, 2 * math.pi), qubits[0])
    if kind in ("h", "x", "y", "z"):
        gate = getattr(sim, kind)(qubits[0])
        if len(qubits) > 1 and rng.random() < 0.4:  # sprinkle in controls
            return sim.Gate(gate.kind, gate.targets, gate.params,
                            controls=(qubits[1],))
        return gate
    if kind == "cx" and n >= 2:
        return sim.cx(qubits[1], qubits[0])
    if kind == "cp" and n >= 2:
        return sim.cp(rng.uniform(0, 2 * math.pi), qubits[1], qubits[0])
    if kind == "swap" and n >= 2:
        return sim.swap(qubits[0], qubits[1])
    if kind == "perm":
        width = 1 if n == 1 else rng.choice([1, 2])
        table = list(range(2 ** width))
        rng.shuffle(table)
        return sim.permutation(qubits[:width], table)
    return sim.h(qubits[0])


def _oracle_dict(gate):
    if gate.kind is sim.GateKind.CNOT:
        # oracle treats CNOT as a controlled X
        return {"kind": "x", "targets": gate.targets, "controls": gate.controls}
    return {
        "kind": gate.kind.value,
        "targets": gate.targets,
        "params": gate.params,
        "controls": gate.controls,
        "perm_table": gate.perm_table,
    }


def test_simulator_matches_kronecker_oracle_200_circuits():
    rng = random.Random(20260815)
    started = time.perf_counter()
    for _ in range(200):
        n = rng.randint(1, 4)
        gates = tuple(_random_gate(rng, n) for _ in range(rng.randint(0, 12)))
        state = sim.new_state(n)
        for gate in gates:
            state = sim.apply_gate(state, gate)
        expected = oracles.oracle_final_state(n, [_oracle_dict(g) for g in gates])
        assert np.max(np.abs(state.amplitudes - expected)) < 1e-9
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) < 1e-9
    assert time.perf_counter() - started < 10.0


# -- 2. gate math: U(pi/2, 0, pi) is H; CNOT entangles ----------------------------

def test_gate_math_hadamard_identity_and_bell_creation():
    got = sim.single_qubit_unitary(math.pi / 2, 0.0, math.pi)
    want = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    assert np.max(np.abs(got - want)) < 1e-12

    s = 1 / math.sqrt(2)
    superposed = sim.StateVector(2, np.array([s, s, 0, 0], dtype=complex))
    entangled = sim.apply_gate(superposed, sim.cx(0, 1))
    bell = np.array([s, 0, 0, s], dtype=complex)
    assert np.max(np.abs(entangled.amplitudes - bell)) < 1e-12


# -- 3. Deutsch-Jozsa separates constant from balanced ------------------------------

def test_deutsch_jozsa_constant_exact_balanced_suppressed():
    for oracle in (bi.OracleKind.CONSTANT_0, bi.OracleKind.CONSTANT_1):
        circuit = bi.build_dj_circuit(4, oracle)
        state = sim.final_state(circuit)
        # zero tolerance: every amplitude with a set input-register bit is 0.0
        input_mask = (1 << 4) - 1
        for index, amp in enumerate(state.amplitudes):
            if index & input_mask:
                assert amp == 0.0
        marginal = sim.marginal_probabilities(state, circuit.measured_qubits)
        assert marginal[0] == pytest.approx(1.0, abs=1e-9)
        counts = sim.run_circuit(circuit, shots=2048, seed=5)
        assert counts == {"0000": 2048}

    balanced = bi.build_dj_circuit(4, bi.OracleKind.BALANCED_XOR)
    state = sim.final_state(balanced)
    marginal = sim.marginal_probabilities(state, balanced.measured_qubits)
    assert marginal[0] < 1e-12


# -- 4. QRNG deployed end to end -----------------------------------------------------

PROVIDER_INFO_FIELDS = {
    "shots",
    "job_id",
    "job_status",
    "running_start_time",
    "completion_time",
    "total_run_time",
}

# chi-square critical value, 15 degrees of freedom, significance 0.001
CHI2_CRITICAL_15_DOF_P001 = 37.697


def test_qrng_end_to_end_schema_and_uniformity(platform, engineer):
    deploy_builtin(platform, engineer, "qrng", "qrng")

    for n in (1, 10, 16, 20):
        response = platform.engine.invoke(
            engineer, "qrng", {"input": n, "shots": 1024, "seed": 424242}
        )
        assert set(response) == {"result", "backend_device", "detail"}
        detail = response["detail"]
        assert set(detail) == {
            "provider_info",
            "random_number_binary",
            "counts",
            "all_possible_values",
        }
        assert set(detail["provider_info"]) == PROVIDER_INFO_FIELDS
        assert detail["provider_info"]["shots"] == 1024
        assert detail["provider_info"]["job_status"] == "DONE"
        binary = detail["random_number_binary"]
        assert len(binary) == n
        assert response["result"] == int(binary, 2)
        assert detail["all_possible_values"][binary] == response["result"]
        assert 1 <= detail["counts"] <= 1024

    # uniformity at n=4 over 100k shots
    response = platform.engine.invoke(
        engineer, "qrng", {"input": 4, "shots": 100_000, "seed": 99}
    )
    job_id = response["detail"]["provider_info"]["job_id"]
    counts = platform.get_job_doc(job_id, engineer)["counts"]
    statistic = oracles.chi_square_statistic(counts, 100_000, 16)
    assert statistic < CHI2_CRITICAL_15_DOF_P001


# -- 5. Shor deployed end to end -------------------------------------------------------

def test_shor_end_to_end_15_21_and_invalid(platform, engineer):
    deploy_builtin(platform, engineer, "factor", "shor", post="shor_factors")
    client = TestClient(create_app(platform), raise_server_exceptions=False)
    headers = {"Authorization": f"Bearer {engineer.token}"}

    started = time.perf_counter()
    resp = client.post(
        "/function/factor", headers=headers,
        json={"input": 15, "shots": 512, "seed": 7},
    )
    assert time.perf_counter() - started < 60.0
    assert resp.status_code == 200
    body = resp.json()
    assert body["result"] == [[3, 5]]
    assert body["detail"]["shots"] == 512

    started = time.perf_counter()
    resp = client.post(
        "/function/factor", headers=headers,
        json={"input": 21, "shots": 512, "seed": 7},
    )
    assert time.perf_counter() - started < 60.0
    assert resp.status_code == 200
    pairs = resp.json()["result"]
    assert [3, 7] in pairs
    for a, b in pairs:
        assert a * b == 21 and a > 1 and b > 1

    started = time.perf_counter()
    resp = client.post(
        "/function/factor", headers=headers, json={"input": 4, "shots": 16}
    )
    assert time.perf_counter() - started < 60.0
    assert resp.status_code == 400
    assert resp.json()["code"] == "InvalidN"


# -- 6. backend selection vs brute-force oracle ------------------------------------------

_NAME_POOL = ["alpha", "beta", "delta", "gamma", "kappa", "omega", "sigma", "zeta"]


def _random_catalog(rng):
    catalog = []
    names = rng.sample(_NAME_POOL, k=rng.randint(1, 6))
    if rng.random() < 0.5:
        catalog.append(
            {
                "name": "internal_simulator",
                "provider": "internal",
                "type": "internal_simulator",
                "qubits": rng.randint(4, 24),
            }
        )
    for name in names:
        catalog.append(
            {
                "name": name,
                "provider": rng.choice(["ibmq", "braket"]),
                "type": rng.choice(["external_simulator", "qpu"]),
                "qubits": rng.randint(1, 32),
                "operational": rng.random() < 0.8,
            }
        )
    return catalog


def test_backend_selection_agrees_with_oracle_1000_catalogs():
    rng = random.Random(31415)
    agreements = 0
    for _ in range(1000):
        manager = be.BackendManager(_random_catalog(rng), queue_seed=1)
        for backend in manager.backends.values():
            backend._pending = rng.choice([0, 0, 1, 1, 2])
        snapshot = [b.to_doc() for b in manager.backends.values()]

        provider = rng.choice(["internal", "ibmq", "braket", "nimbus"])
        required = rng.randint(1, 30)
        internal = rng.random() < 0.3
        autoselect = rng.random() < 0.6
        types = rng.sample(
            ["internal_simulator", "external_simulator", "qpu"],
            k=rng.randint(0, 2),
        )
        backend_name = rng.choice(
            [None, None, "ghost"] + [b["name"] for b in snapshot]
        )
        has_credential = rng.random() < 0.6

        expected = oracles.selection_oracle(
            snapshot, provider, required, internal, autoselect,
            types, backend_name, has_credential,
        )
        info = be.BackendInfo(
            provider=provider,
            autoselect=autoselect,
            types=tuple(types),
            backend_name=backend_name,
            internal=internal,
        )
        try:
            chosen = manager.backend_selection(
                required, info, credential="tok" if has_credential else None
            )
            got = (chosen.name, None)
        except QfaasError as exc:
            got = (None, type(exc).__name__)
        if got == expected:
            agreements += 1
        manager.close()
    assert agreements == 1000  # 100% agreement, no tolerance


# -- 7. pricing worked example --------------------------------------------------------

TABLE_ROWS = {
    "dwave_2000q": ("0.30000", "0.00019"),
    "dwave_advantage": ("0.30000", "0.00019"),
    "ionq_device": ("0.30000", "0.01000"),
    "oqc_lucy": ("0.30000", "0.00035"),
    "rigetti_aspen_11": ("0.30000", "0.00035"),
    "rigetti_m1": ("0.30000", "0.00035"),
}


def test_pricing_rigetti_m1_worked_example_and_catalog_rows():
    catalog = {entry["name"]: entry for entry in be.load_catalog()}
    for name, (task_price, shot_price) in TABLE_ROWS.items():
        entry = catalog[name]
        assert Decimal(entry["perTaskPrice"]) == Decimal(task_price), name
        assert Decimal(entry["perShotPrice"]) == Decimal(shot_price), name

    manager = be.BackendManager(queue_seed=0)
    try:
        rigetti = manager.backends["rigetti_m1"]
        cost = be.estimate_cost(rigetti, tasks=1, shots=10000)
        assert cost == Decimal("3.80")
        assert str(cost) == "3.80"
    finally:
        manager.close()


# -- 8. replica scaling lowers mean completion time -------------------------------------

def test_scalability_mean_latency_ordering(tmp_path):
    config = PlatformConfig(
        data_dir=tmp_path / "scale",
        cold_start_millis=0,
        replica_overhead_millis=50,
    )
    platform = Platform(config)
    try:
        engineer = platform.users.create_user("eng", Role.ENGINEER)
        deploy_builtin(platform, engineer, "rng", "qrng")

        def mean_latency(replicas):
            platform.functions.scale_function(engineer, "rng", replicas)
            barrier = threading.Barrier(64)
            latencies = []

            def one(i):
                barrier.wait()
                t0 = time.perf_counter()
                platform.engine.invoke(
                    engineer, "rng", {"input": 1, "shots": 4, "seed": i}
                )
                return time.perf_counter() - t0

            with ThreadPoolExecutor(max_workers=64) as pool:
                latencies = list(pool.map(one, range(64)))
            return sum(latencies) / len(latencies)

        mean_1 = mean_latency(1)
        mean_32 = mean_latency(32)
        mean_64 = mean_latency(64)
    finally:
        platform.close()

    assert mean_64 < mean_32 < mean_1


# -- 9. rolling update never drops a request ----------------------------------------------

V1_SOURCE = "qir 1;\nqubits 1;\nx 0;\nmeasure all;\n"  # always measures 1
V2_SOURCE = "qir 1;\nqubits 1;\nmeasure all;\n"  # always measures 0


def test_rolling_update_zero_failures_single_switchover(platform, engineer):
    platform.functions.create_function(engineer, "roll", V1_SOURCE, replicas=2)

    update_error = []

    def do_update():
        time.sleep(4.0)
        try:
            platform.functions.update_function(engineer, "roll", {"source": V2_SOURCE})
        except Exception as exc:  # pragma: no cover - should not happen
            update_error.append(exc)

    updater = threading.Thread(target=do_update)
    updater.start()

    results = []
    for i in range(200):  # 20 req/s for 10 s
        tick = time.perf_counter()
        response = platform.engine.invoke(
            engineer, "roll", {"shots": 4, "seed": i}
        )
        results.append(response["result"])
        remaining = 0.05 - (time.perf_counter() - tick)
        if remaining > 0:
            time.sleep(remaining)
    updater.join()

    assert not update_error
    assert len(results) == 200  # zero failed requests
    assert set(results) <= {0, 1}
    assert results[0] == 1 and results[-1] == 0
    switchovers = sum(
        1 for prev, cur in zip(results, results[1:]) if prev != cur
    )
    assert switchovers == 1  # both versions observed, exactly one transition


# -- 10. authorization matrix ---------------------------------------------------------------

MUTATING = {"POST", "PUT", "DELETE"}


def test_auth_matrix_exhaustive_sweep(platform, admin, engineer, end_user):
    client = TestClient(create_app(platform), raise_server_exceptions=False)
    tokens = {
        Role.ADMINISTRATOR: admin.token,
        Role.ENGINEER: engineer.token,
        Role.END_USER: end_user.token,
    }
    deviations = []
    for method, path, min_role, name in ROUTE_TABLE:
        url = path.format(user_id="u", name="f", job_id="j")
        for role, token in tokens.items():
            resp = client.request(
                method, url, headers={"Authorization": f"Bearer {token}"}, json={}
            )
            allowed = role_at_least(role, min_role)
            if allowed and resp.status_code in (401, 403):
                deviations.append((method, path, role.value, resp.status_code))
            if not allowed and resp.status_code != 403:
                deviations.append((method, path, role.value, resp.status_code))
        # unauthenticated mutating requests must be rejected outright
        if method in MUTATING:
            resp = client.request(method, url, json={})
            if resp.status_code not in (401, 403):
                deviations.append((method, path, "anonymous", resp.status_code))
    assert deviations == []


# -- 11. crash-safe persistence ----------------------------------------------------------------

class Crash(Exception):
    pass


def test_persistence_crash_safety_1000_trials(tmp_path):
    rng = random.Random(777)
    root = tmp_path / "faults"
    store = DocumentStore(root)
    ids = ["alpha", "beta", "gamma"]
    history = {doc_id: [] for doc_id in ids}  # every attempted value, in order
    last_ack = {}

    for trial in range(1000):
        doc_id = rng.choice(ids)
        # occasionally cross the compression threshold to hit both file forms
        body = {"value": trial, "pad": "x" * rng.choice([0, 0, 0, 70_000])}
        point = rng.choice(FAULT_POINTS + (None, None, None))
        if point is not None:
            armed = [True]

            def hook(stage, _point=point, _armed=armed):
                if _armed[0] and stage == _point:
                    _armed[0] = False
                    raise Crash(stage)

            store.fault_hook = hook
        else:
            store.fault_hook = None

        acknowledged = True
        try:
            store.put("docs", doc_id, body)
        except (Crash, StorageError):
            acknowledged = False
        finally:
            store.fault_hook = None
        history[doc_id].append(trial)
        if acknowledged:
            last_ack[doc_id] = trial

        # restart: a fresh handle over the same directory
        store = DocumentStore(root)
        for known_id, ack_value in last_ack.items():
            doc = store.get("docs", known_id)  # acknowledged -> readable
            value = doc.body["value"]
            attempts = history[known_id]
            assert value in attempts  # never torn or interleaved
            # never older than the last acknowledged write
            assert attempts.index(value) >= attempts.index(ack_value)


# -- 12. dashboard integration (secondary component) ----------------------------------------

def _free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_dashboard_integration_against_live_gateway(tmp_path):
    script = REPO_ROOT / "frontend" / "integration" / "acceptance.mjs"
    dist = REPO_ROOT / "frontend" / "dist" / "index.html"
    assert script.is_file(), "frontend integration script missing"
    assert dist.is_file(), "frontend build missing (frontend/dist)"

    port = _free_port()
    admin_token = "acceptance-admin-token"
    config_path = tmp_path / "gateway.json"
    config_path.write_text(
        json.dumps(
            {
                "dataDir": str(tmp_path / "data"),
                "addr": f"127.0.0.1:{port}",
                "adminToken": admin_token,
                "coldStartMillis": 0,
                "uiDir": str(REPO_ROOT / "frontend" / "dist"),
            }
        )
    )
    server = subprocess.Popen(
        [sys.executable, "-m", "qfaas.gateway", "--config", str(config_path)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    try:
        import requests

        base = f"http://127.0.0.1:{port}"
        deadline = time.time() + 30
        while True:
            try:
                if requests.get(base + "/", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                pass
            assert time.time() < deadline, "gateway did not come up"
            assert server.poll() is None, "gateway exited early"
            time.sleep(0.1)

        # the dashboard is served at /ui
        ui = requests.get(base + "/ui/", timeout=5)
        assert ui.status_code == 200
        assert "<!doctype html>" in ui.text.lower()

        run = subprocess.run(
            ["node", str(script), base, admin_token],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert run.returncode == 0, f"stdout:\n{run.stdout}\nstderr:\n{run.stderr}"
    finally:
        server.terminate()
        try:
            server.wait(timeout=10)
        except subprocess.TimeoutExpired:
            server.kill()
