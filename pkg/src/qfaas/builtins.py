"""Built-in circuit constructions: QRNG, Deutsch-Jozsa, Shor.

Shor uses 2n counting qubits plus n work qubits (n = bit length of N).
The controlled modular-multiplication blocks are classically computed
basis permutations, which keeps the circuit simulable and lets tests
verify each block against plain integer arithmetic.
"""

from __future__ import annotations

import enum
import math
from typing import Any, Dict, List, Optional

from .config import DEFAULT_MAX_QUBITS
from .errors import InputOutOfRange, InvalidN, NotCoprime, QubitLimitExceeded
from .ir import Circuit
from .simulator import Gate, cp, cx, h, permutation, swap, x


class OracleKind(str, enum.Enum):
    CONSTANT_0 = "constant_0"
    CONSTANT_1 = "constant_1"
    BALANCED_XOR = "balanced_xor"


def _check_qubits(needed: int, max_qubits: int, what: str) -> None:
    if not 1 <= needed <= max_qubits:
        raise QubitLimitExceeded(
            f"{what} needs {needed} qubits, allowed range is 1..{max_qubits}",
            detail={"requested": needed, "max_qubits": max_qubits},
        )


def build_qrng_circuit(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> Circuit:
    """n qubits in equal superposition, all measured."""
    _check_qubits(n, max_qubits, "qrng")
    return Circuit(n, tuple(h(q) for q in range(n)), tuple(range(n)))


def build_dj_circuit(
    n: int, oracle: OracleKind, max_qubits: int = DEFAULT_MAX_QUBITS
) -> Circuit:
    """Deutsch-Jozsa over n input qubits (0..n-1) plus ancilla qubit n.

    Only the input register is measured: all-zero means constant.
    """
    oracle = OracleKind(oracle)
    _check_qubits(n + 1, max_qubits, "deutsch-jozsa")
    ancilla = n
    gates: List[Gate] = [x(ancilla)]
    gates.extend(h(q) for q in range(n + 1))
    if oracle is OracleKind.CONSTANT_1:
        gates.append(x(ancilla))
    elif oracle is OracleKind.BALANCED_XOR:
        gates.extend(cx(q, ancilla) for q in range(n))
    gates.extend(h(q) for q in range(n))
    return Circuit(n + 1, tuple(gates), tuple(range(n)), {"oracle": oracle.value})


# --- classical number theory for Shor ----------------------------------------

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def _is_prime_power(n: int) -> bool:
    f = 2
    while f * f <= n:
        if n % f == 0:
            while n % f == 0:
                n //= f
            return n == 1
        f += 1
    return False  # n prime or 1; callers test primality separately


def validate_shor_modulus(n: int) -> None:
    if n <= 3:
        raise InvalidN(f"N={n} is too small to factor")
    if n % 2 == 0:
        raise InvalidN(f"N={n} is even; divide by 2 classically")
    if _is_prime(n):
        raise InvalidN(f"N={n} is prime")
    if _is_prime_power(n):
        raise InvalidN(f"N={n} is a prime power")


def default_shor_base(n: int) -> int:
    """Smallest base coprime to N.  Deterministic, so responses are stable."""
    for a in range(2, n):
        if math.gcd(a, n) == 1:
            return a
    raise InvalidN(f"no coprime base exists for N={n}")


def multiplicative_order(a: int, n: int) -> int:
    """Smallest r >= 1 with a^r = 1 (mod n).  Test oracle and reducer."""
    value = a % n
    for r in range(1, n + 1):
        if value == 1:
            return r
        value = (value * a) % n
    raise NotCoprime(f"{a} has no multiplicative order modulo {n}")


def build_shor_circuit(
    N: int, a: int, max_qubits: int = DEFAULT_MAX_QUBITS
) -> Circuit:
    """Order-finding circuit: 2n counting qubits, n work qubits.

    Counting register = qubits 0..2n-1 (measured), work register = qubits
    2n..3n-1, prepared in |1>.  Counting qubit k controls multiplication
    by a^(2^k) mod N on the work register; values >= N pass through
    unchanged so each table stays a bijection.  An inverse QFT on the
    counting register exposes the phase.
    """
    validate_shor_modulus(N)
    if not 1 < a < N:
        raise NotCoprime(f"base must satisfy 1 < a < N, got a={a}")
    if math.gcd(a, N) != 1:
        raise NotCoprime(f"gcd({a}, {N}) = {math.gcd(a, N)}, base must be coprime")

    n = N.bit_length()
    m = 2 * n
    _check_qubits(m + n, max_qubits, f"shor for N={N}")
    work = tuple(range(m, m + n))

    gates: List[Gate] = [h(q) for q in range(m)]
    gates.append(x(m))  # work register |1>

    for k in range(m):
        mult = pow(a, 2**k, N)
        table = [(v * mult) % N if v < N else v for v in range(2**n)]
        gates.append(permutation(work, table, controls=(k,)))

    # Inverse QFT on the counting register, qubit 0 least significant.
    for q in range(m // 2):
        gates.append(swap(q, m - 1 - q))
    for j in range(m):
        for k in range(j):
            gates.append(cp(-math.pi / 2 ** (j - k), k, j))
        gates.append(h(j))

    meta = {"modulus": N, "base": a, "counting_qubits": m, "work_qubits": n}
    return Circuit(m + n, tuple(gates), tuple(range(m)), meta)


def order_from_phase(y: int, counting_qubits: int, N: int, a: int) -> Optional[int]:
    """Recover the order of a mod N from one measured counting value.

    Walks the continued-fraction convergents of y / 2^m.  A measured peak
    gives denominator r/gcd(c, r), so each denominator is also scanned at
    small multiples (bounded by 2 * bit length, keeping the classical work
    polynomial) before being accepted via a^d = 1 (mod N).
    """
    M = 2**counting_qubits
    if not 0 <= y < M:
        raise InputOutOfRange(f"measured value {y} outside 0..{M - 1}")
    if y == 0:
        return None  # phase 0 carries no period information
    max_multiplier = 2 * N.bit_length()
    denominators: List[int] = []
    k_prev2, k_prev1 = 1, 0
    num, den = y, M
    while den > 0:
        term = num // den
        k = term * k_prev1 + k_prev2
        if k >= N:
            break
        denominators.append(k)
        k_prev2, k_prev1 = k_prev1, k
        num, den = den, num % den

    for d in denominators:
        for mult in range(1, max_multiplier + 1):
            candidate = d * mult
            if candidate >= N:
                break
            if pow(a, candidate, N) == 1:
                # candidate is a multiple of the true order; reduce it.
                for div in range(1, candidate + 1):
                    if candidate % div == 0 and pow(a, div, N) == 1:
                        return div
    return None


def factors_from_order(N: int, a: int, order: int) -> Optional[List[int]]:
    """gcd(a^(r/2) +- 1, N) filtering; None when r gives only trivial factors."""
    if order % 2 != 0:
        return None
    half = pow(a, order // 2, N)
    if half == N - 1:
        return None
    p = math.gcd(half - 1, N)
    q = math.gcd(half + 1, N)
    pair = sorted({p, q} - {1, N})
    if not pair:
        return None
    if len(pair) == 1:
        other = N // pair[0]
        if other in (1, N) or pair[0] * other != N:
            return None
        pair = sorted([pair[0], other])
    if pair[0] * pair[1] != N:
        return None
    return pair


def validate_builtin_config(kind: str, config: Dict[str, Any]) -> None:
    """Fail fast at build time on bad builtin knobs."""
    if kind == "builtin_dj" and "oracle" in config:
        OracleKind(config["oracle"])
    if kind == "builtin_shor" and "base" in config:
        base = config["base"]
        if not isinstance(base, int) or isinstance(base, bool) or base < 2:
            raise ValueError(f"shor base must be an integer >= 2, got {base!r}")
