#!/usr/bin/env python3
#
#  problem.py
#  sincheb
#
#  JSON problem files: weighted Pauli-string or explicit-matrix Hamiltonians,
#  identity / explicit / named-gate V_j, amplitude-list or basis-string states.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import json
import math
import numpy as np
from functools import reduce
from pathlib import Path
from sincheb.common.core import ProblemParseError, _get_logger, _log_event
from sincheb.linalg.dense import operator_norm
from sincheb.pipeline.estimator import EvolutionProblem, EvolutionStage
from sincheb.trotter.suzuki import DecomposedHamiltonian
from typing import Any, Dict, List, Optional, Tuple, Union

logger = _get_logger("cli")

paulis: Dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

one_qubit_gates: Dict[str, np.ndarray] = {
    **paulis,
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0),
    "S": np.diag([1, 1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]).astype(complex),
}

two_qubit_gates: Dict[str, np.ndarray] = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def pauli_matrix(string: str, field: str = "pauli") -> np.ndarray:
    """Kronecker product of the single-qubit Paulis named by the string, qubit 0 leftmost."""
    try:
        ops = [paulis[c] for c in string.strip().upper()]
    except KeyError as err:
        raise ProblemParseError(f"unknown Pauli letter {err.args[0]!r} in {string!r}", field=field) from None
    if not ops:
        raise ProblemParseError("empty Pauli string", field=field)
    return reduce(np.kron, ops)


def _complex(value: Any, field: str) -> complex:
    """A JSON number or [re, im] pair."""
    if isinstance(value, bool):
        raise ProblemParseError(f"expected a number, got {value!r}", field=field)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ProblemParseError(f"expected a number or [re, im], got {value!r}", field=field)


def _real(value: Any, field: str) -> float:
    """A JSON number that is not a boolean."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemParseError(f"expected a real number, got {value!r}", field=field)
    return float(value)


def _matrix(value: Any, dim: int, field: str) -> np.ndarray:
    """A dim x dim list of complex entries."""
    if not isinstance(value, list) or len(value) != dim:
        raise ProblemParseError(f"expected a {dim}x{dim} matrix", field=field)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != dim:
            raise ProblemParseError(f"row {i} must have {dim} entries", field=field)
        rows.append([_complex(x, f"{field}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def _embed(gate: np.ndarray, targets: List[int], qubits: int) -> np.ndarray:
    """Full 2^n matrix of a gate on the given (ordered) target qubits."""
    rest = [i for i in range(qubits) if i not in targets]
    full = np.kron(gate, np.eye(2 ** len(rest), dtype=complex)).reshape([2] * (2 * qubits))
    # axes of `full` are (targets..., rest...) for rows then columns; move them to qubit order
    order = targets + rest
    perm = [order.index(i) for i in range(qubits)]
    full = full.transpose(perm + [qubits + p for p in perm])
    return full.reshape(2 ** qubits, 2 ** qubits)


def _gate(spec: Any, qubits: Optional[int], field: str) -> np.ndarray:
    """Full matrix of a named gate such as 'H 0' or 'CNOT 0 1'."""
    if not isinstance(spec, str) or not spec.split():
        raise ProblemParseError(f"expected a gate like 'H 0' or 'CNOT 0 1', got {spec!r}", field=field)
    if qubits is None:
        raise ProblemParseError("named gates need a qubit count", field=field)
    name, *args = spec.split()
    name = name.upper()
    try:
        targets = [int(a) for a in args]
    except ValueError:
        raise ProblemParseError(f"gate targets must be integers in {spec!r}", field=field) from None
    if name in one_qubit_gates:
        gate, arity = one_qubit_gates[name], 1
    elif name in two_qubit_gates:
        gate, arity = two_qubit_gates[name], 2
    else:
        raise ProblemParseError(f"unknown gate {name!r}", field=field)
    if len(targets) != arity or len(set(targets)) != arity or any(not 0 <= t < qubits for t in targets):
        raise ProblemParseError(f"gate {name} needs {arity} distinct targets in 0..{qubits - 1}", field=field)
    return _embed(gate, targets, qubits)


def _unitary(value: Any, dim: int, qubits: Optional[int], field: str) -> np.ndarray:
    """Identity, a named gate, a list of gates or an explicit matrix."""
    if value is None or value == "identity":
        return np.eye(dim, dtype=complex)
    if isinstance(value, str):
        return _gate(value, qubits, field)
    if isinstance(value, list) and value and all(isinstance(g, str) for g in value):
        # listed gates multiply left to right: ["A", "B"] is A @ B
        return reduce(np.matmul, [_gate(g, qubits, f"{field}[{i}]") for i, g in enumerate(value)])
    return _matrix(value, dim, field)


def _term(value: Any, dim: int, qubits: Optional[int], field: str) -> Tuple[np.ndarray, float]:
    """Returns (matrix, norm) of one Hamiltonian term."""
    if isinstance(value, list) and len(value) == 2 and isinstance(value[1], str):
        value = {"coeff": value[0], "pauli": value[1]}
    if not isinstance(value, dict):
        raise ProblemParseError("a term is {'coeff': c, 'pauli': 'XZ'}, [c, 'XZ'] or {'matrix': ...}", field=field)
    if "pauli" in value:
        if qubits is None:
            raise ProblemParseError("Pauli terms need a qubit count", field=field)
        string = value["pauli"]
        if not isinstance(string, str) or len(string.strip()) != qubits:
            raise ProblemParseError(f"Pauli string must have length {qubits}", field=f"{field}.pauli")
        coeff = _real(value.get("coeff", 1.0), f"{field}.coeff")
        return coeff * pauli_matrix(string, f"{field}.pauli"), abs(coeff)
    if "matrix" in value:
        m = _matrix(value["matrix"], dim, f"{field}.matrix")
        return m, operator_norm(m)
    raise ProblemParseError("term needs 'pauli' or 'matrix'", field=field)


def _state(value: Any, dim: int, qubits: Optional[int], field: str) -> np.ndarray:
    """A basis string, a basis index or a list of amplitudes."""
    if isinstance(value, str):
        bits = value.strip()
        if bits.startswith("|") and bits.endswith(">"):
            bits = bits[1:-1]
        width = qubits if qubits is not None else max(1, (dim - 1).bit_length())
        if len(bits) != width or any(c not in "01" for c in bits) or int(bits, 2) >= dim:
            raise ProblemParseError(f"basis state must be {width} binary digits, got {value!r}", field=field)
        psi = np.zeros(dim, dtype=complex)
        psi[int(bits, 2)] = 1.0
        return psi
    if isinstance(value, int) and not isinstance(value, bool):
        if not 0 <= value < dim:
            raise ProblemParseError(f"basis index {value} outside 0..{dim - 1}", field=field)
        psi = np.zeros(dim, dtype=complex)
        psi[value] = 1.0
        return psi
    if isinstance(value, list) and len(value) == dim:
        return np.array([_complex(x, f"{field}[{i}]") for i, x in enumerate(value)], dtype=complex)
    raise ProblemParseError(f"state must be a basis string or {dim} amplitudes", field=field)


def _dimensions(data: Dict[str, Any]) -> Tuple[int, Optional[int]]:
    """(dim, qubits) from 'qubits' or 'dim'; qubits is None for a bare dimension."""
    if "qubits" in data:
        qubits = data["qubits"]
        if isinstance(qubits, bool) or not isinstance(qubits, int) or not 1 <= qubits <= 10:
            raise ProblemParseError(f"qubits must be an integer in 1..10, got {qubits!r}", field="qubits")
        if "dim" in data and data["dim"] != 2 ** qubits:
            raise ProblemParseError(f"dim {data['dim']!r} disagrees with {qubits} qubits", field="dim")
        return 2 ** qubits, qubits
    if "dim" in data:
        dim = data["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or not 1 <= dim <= 2 ** 10:
            raise ProblemParseError(f"dim must be an integer in 1..1024, got {dim!r}", field="dim")
        return dim, None
    raise ProblemParseError("problem needs 'qubits' or 'dim'")


def problem_from_dict(data: Any, auto_normalize: bool = False) -> EvolutionProblem:
    """Builds a validated EvolutionProblem from decoded JSON.

    With auto_normalize each stage whose term norms sum to s > 1 has its
    terms divided by s and its time multiplied by s, which leaves
    e^(i T H) unchanged.
    """
    if not isinstance(data, dict):
        raise ProblemParseError("top level must be an object")
    dim, qubits = _dimensions(data)
    raw_stages = data.get("stages")
    if not isinstance(raw_stages, list) or not raw_stages:
        raise ProblemParseError("expected a non-empty list of stages", field="stages")
    stages = []
    for j, raw in enumerate(raw_stages):
        where = f"stages[{j}]"
        if not isinstance(raw, dict):
            raise ProblemParseError("a stage is an object with 'H', 'T' and optional 'V'", field=where)
        raw_terms = raw.get("H")
        if not isinstance(raw_terms, list) or not raw_terms:
            raise ProblemParseError("expected a non-empty list of terms", field=f"{where}.H")
        parsed = [_term(t, dim, qubits, f"{where}.H[{i}]") for i, t in enumerate(raw_terms)]
        terms = [m for m, _ in parsed]
        t = _real(raw.get("T"), f"{where}.T")
        scale = sum(n for _, n in parsed)
        if auto_normalize and scale > 1.0:
            _log_event(logger, "!", f"{where}: rescaling H by 1/{scale:.6g} and T by {scale:.6g}")
            terms = [m / scale for m in terms]
            t *= scale
        h = DecomposedHamiltonian(tuple(terms), label=where)
        v = _unitary(raw.get("V"), dim, qubits, f"{where}.V")
        stages.append(EvolutionStage(v=v, hamiltonian=h, t=t))
    psi1 = _state(data.get("psi1"), dim, qubits, "psi1")
    psi2 = _state(data.get("psi2"), dim, qubits, "psi2")
    return EvolutionProblem(stages=tuple(stages), psi1=psi1, psi2=psi2)


def parse_problem(path: Union[str, Path], auto_normalize: bool = False) -> EvolutionProblem:
    """Reads and validates a JSON problem file."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProblemParseError(f"invalid JSON: {err.msg}", line=err.lineno) from None
    return problem_from_dict(data, auto_normalize)


def _encode_matrix(m: np.ndarray) -> List[List[List[float]]]:
    """[[re, im], ...] rows of a complex matrix."""
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def emit_problem(problem: EvolutionProblem) -> Dict[str, Any]:
    """JSON-ready dict with every operator written out explicitly."""
    return {
        "dim": problem.dim,
        "stages": [
            {
                "V": _encode_matrix(s.v),
                "H": [{"matrix": _encode_matrix(term)} for term in s.hamiltonian.terms],
                "T": s.t,
            }
            for s in problem.stages
        ],
        "psi1": [[float(x.real), float(x.imag)] for x in problem.psi1],
        "psi2": [[float(x.real), float(x.imag)] for x in problem.psi2],
    }


def write_problem(problem: EvolutionProblem, path: Union[str, Path]) -> None:
    """Writes emit_problem(problem) as indented JSON."""
    Path(path).write_text(json.dumps(emit_problem(problem), indent=1) + "\n")
