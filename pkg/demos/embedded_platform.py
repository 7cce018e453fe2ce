#!/usr/bin/env python3
"""Full function lifecycle against an embedded platform, no server involved.

Walks through: boot, users, deploy (template and hand-written source),
invoke on the internal simulator and on a mock provider, a zero-downtime
update, cost estimation, and the durable job log.

Run from the repository root:

    python3 demos/embedded_platform.py
"""

import json
import tempfile

from qfaas import Platform, PlatformConfig, Role
from qfaas.backends import estimate_cost

BELL_V1 = """\
qir 1;
qubits 2;

h 0;
cx 0, 1;

measure all;
"""

# v2 flips the second qubit first, so the dominant outcomes move to 01/10.
BELL_V2 = """\
qir 1;
qubits 2;

x 1;
h 0;
cx 0, 1;

measure all;
"""


def show(title, payload):
    print(f"\n== {title}")
    print(json.dumps(payload, indent=2, default=str))


def main():
    with tempfile.TemporaryDirectory(prefix="qfaas-demo-") as data_dir:
        platform = Platform(PlatformConfig(data_dir=data_dir, cold_start_millis=0))
        try:
            run(platform)
        finally:
            platform.close()


def run(platform):
    admin = platform.admin
    print(f"administrator {admin.username!r} ready, token minted at boot")

    # Engineers deploy functions; end users can only invoke and read.
    dev = platform.users.create_user("dev", Role.ENGINEER)
    alice = platform.users.create_user("alice", Role.END_USER)
    print(f"users: {dev.username} ({dev.role.value}), {alice.username} ({alice.role.value})")

    # A builtin template: quantum random numbers, input picks the bit width.
    record, endpoint = platform.functions.create_function(
        dev, "rng", "qir 1;\n", config={"template": "qrng"}
    )
    print(f"\ndeployed {record['name']} v{record['version']} at {endpoint}")

    result = platform.engine.invoke(
        alice, "rng", {"input": 6, "shots": 512, "seed": 7}
    )
    show("rng invoke (6 bits, 512 shots)", {
        "result": result["result"],
        "binary": result["detail"]["random_number_binary"],
        "backend": result["backend_device"],
    })

    # Hand-written source with a post-processing plugin.
    record, endpoint = platform.functions.create_function(
        dev, "bell", BELL_V1, processors={"post": "most_frequent"}, replicas=2
    )
    print(f"\ndeployed {record['name']} v{record['version']} at {endpoint}")

    result = platform.engine.invoke(dev, "bell", {"shots": 2048, "seed": 1})
    show("bell invoke", {
        "result": result["result"],
        "top outcome": result["detail"]["random_number_binary"],
        "its count": result["detail"]["counts"],
    })

    # Same name, new circuit. Replicas drain one at a time, so invokes keep
    # succeeding while the version flips.
    record = platform.functions.update_function(dev, "bell", {"source": BELL_V2})
    result = platform.engine.invoke(dev, "bell", {"shots": 2048, "seed": 1})
    show("bell after update", {
        "version": record["version"],
        "top outcome": result["detail"]["random_number_binary"],
    })

    # Route an invoke to a mock cloud device instead of the internal
    # simulator. Mock providers accept any nonempty credential.
    platform.users.register_credential(
        dev, "braket", "demo-credential", platform.backends.providers
    )
    result = platform.engine.invoke(
        dev,
        "bell",
        {
            "shots": 100,
            "provider": "braket",
            "backendInfo": {"backendName": "rigetti_m1"},
        },
    )
    show("bell on a mock QPU", {
        "backend": result["backend_device"],
        "job_status": result["detail"]["provider_info"]["job_status"],
    })

    # The Shor builtin factors its input; the template wires the
    # continued-fraction post-processing on its own.
    platform.functions.create_function(
        dev, "factor", "qir 1;\n", config={"template": "shor"}
    )
    result = platform.engine.invoke(dev, "factor", {"input": 15, "shots": 2048})
    show("factor 15", {
        "factor pairs": result["result"],
        "qubits used": result["detail"]["required_qubits"],
    })

    # What would that cost at the catalog's published prices?
    rigetti = platform.backends.backends["rigetti_m1"]
    print(f"\n1 task x 100 shots on rigetti_m1: ${estimate_cost(rigetti, 1, 100)}")
    print(f"1 task x 10000 shots on rigetti_m1: ${estimate_cost(rigetti, 1, 10000)}")

    # Every completed invocation left a durable job document.
    jobs = platform.list_job_docs(admin)
    print(f"\njob log: {len(jobs)} jobs")
    for doc in jobs:
        print(f"  {doc['job_id'][:12]}  {doc['function_name']:<6} {doc['status']:<5} "
              f"on {doc['backend_name']}")

    status = platform.system_status()
    print(f"\nserved {status['invocations']['total']} invocations across "
          f"{len(status['functions'])} functions")


if __name__ == "__main__":
    main()
