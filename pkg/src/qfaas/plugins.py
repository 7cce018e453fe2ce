"""Built-in processing plugins.

Functions name a pre-processor (shapes the request input) and a
post-processor (shapes the measured counts into the response payload).
These replace user-supplied handler code; each is a pure, documented
transformation so results stay reproducible.

A post-processor returns a dict whose "result" key becomes the response's
top-level result; every other key is merged into the response detail.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable, Dict

from . import builtins as bi
from .errors import NoPeriodFound, UnknownPlugin
from .simulator import Counts


class PluginStage(str, enum.Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class Plugin:
    name: str
    stage: PluginStage
    fn: Callable[..., Any]


def _pre_identity(value: int, context: Dict[str, Any]) -> int:
    return value


def _pre_clamp_qubits(value: int, context: Dict[str, Any]) -> int:
    return max(1, min(int(value), context["max_qubits"]))


def _post_most_frequent(counts: Counts, context: Dict[str, Any]) -> Dict[str, Any]:
    """Pick the max-count bitstring; ties go to the smallest numeric value."""
    winner = min(counts, key=lambda key: (-counts[key], int(key, 2)))
    return {
        "result": int(winner, 2),
        "random_number_binary": winner,
        "counts": counts[winner],
        "all_possible_values": {
            key: int(key, 2) for key in sorted(counts, key=lambda k: int(k, 2))
        },
    }


def _post_raw_counts(counts: Counts, context: Dict[str, Any]) -> Dict[str, Any]:
    return {"result": dict(counts)}


def _post_shor_factors(counts: Counts, context: Dict[str, Any]) -> Dict[str, Any]:
    """Continued-fraction period extraction, then gcd factor filtering."""
    circuit = context["circuit"]
    meta = circuit.meta
    N = meta["modulus"]
    base = meta["base"]
    m = meta["counting_qubits"]

    pairs = []
    for key in sorted(counts, key=lambda k: (-counts[k], int(k, 2))):
        order = bi.order_from_phase(int(key, 2), m, N, base)
        if order is None:
            continue
        pair = bi.factors_from_order(N, base, order)
        if pair is not None and pair not in pairs:
            pairs.append(pair)
    if not pairs:
        raise NoPeriodFound(
            f"no measured phase produced a usable period for N={N}, a={base}"
        )
    return {
        "result": pairs,
        "required_qubits": circuit.num_qubits,
        "shots": counts.shots,
    }


_REGISTRY: Dict[str, Plugin] = {
    plugin.name: plugin
    for plugin in (
        Plugin("identity", PluginStage.PRE, _pre_identity),
        Plugin("clamp_qubits", PluginStage.PRE, _pre_clamp_qubits),
        Plugin("most_frequent", PluginStage.POST, _post_most_frequent),
        Plugin("raw_counts", PluginStage.POST, _post_raw_counts),
        Plugin("shor_factors", PluginStage.POST, _post_shor_factors),
    )
}


def get_plugin(name: str, stage: PluginStage) -> Plugin:
    plugin = _REGISTRY.get(name)
    if plugin is None or plugin.stage is not stage:
        raise UnknownPlugin(f"no {stage.value}-processor named {name!r}")
    return plugin


def list_plugins() -> Dict[str, str]:
    return {name: plugin.stage.value for name, plugin in sorted(_REGISTRY.items())}


def pre_process(name: str, value: int, context: Dict[str, Any]) -> int:
    return get_plugin(name, PluginStage.PRE).fn(value, context)


def post_process(name: str, counts: Counts, context: Dict[str, Any]) -> Dict[str, Any]:
    payload = get_plugin(name, PluginStage.POST).fn(counts, context)
    if "result" not in payload:
        raise ValueError(f"post-processor {name!r} returned no result")
    return payload
