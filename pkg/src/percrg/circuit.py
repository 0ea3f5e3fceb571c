"""Gate-grid circuit model, text format, and deterministic generators.

A circuit is a rectangular grid: ``n_qubits`` wires crossed by ``n_steps``
timesteps (numbered from 1).  Every (qubit, timestep) site is covered by
exactly one gate; sites not mentioned explicitly are filled with identity
gates so that coverage is total.  Gate kinds are opaque labels; nothing in
this package interprets them.

Text format, one construct per line::

    # comment (blank lines and everything after '#' are ignored)
    qubits <N>
    step: <NAME> <q0> [<q1> [<q2>]] [; <NAME> <q0> ...]*

The first significant line declares the qubit count; each following
significant line describes one timestep.  A bare ``step:`` is a timestep of
identities only.  Gates within a step are canonically ordered by their
smallest qubit, and gate ids are assigned in (time, smallest qubit) order,
so a circuit has exactly one textual normal form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from percrg.rng import CounterRng

IDENTITY = "I"
DEFAULT_MAX_ARITY = 3

_ONE_QUBIT_KINDS = ("H", "S", "T", "X")
_TWO_QUBIT_KINDS = ("CX", "CZ")
_THREE_QUBIT_KINDS = ("CCX",)


class CircuitError(ValueError):
    """A circuit-level invariant was violated."""


class CircuitParseError(CircuitError):
    """Syntax or semantic error in circuit text; carries line and column (1-based)."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Gate:
    """One gate instance: opaque kind, ordered distinct qubits, 1-based timestep."""

    id: int
    kind: str
    qubits: tuple[int, ...]
    time: int

    @property
    def arity(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    n_steps: int
    gates: tuple[Gate, ...]

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        if self.n_steps < 0:
            raise CircuitError("negative step count")
        covered: set[tuple[int, int]] = set()
        for i, g in enumerate(self.gates):
            if g.id != i:
                raise CircuitError(f"gate ids must be 0..{len(self.gates) - 1} in order")
            if not 1 <= g.time <= self.n_steps:
                raise CircuitError(f"gate {g.id} has timestep {g.time} outside 1..{self.n_steps}")
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise CircuitError(f"gate {g.id} uses qubit {q} outside 0..{self.n_qubits - 1}")
                if (q, g.time) in covered:
                    raise CircuitError(f"qubit {q} has two gates at timestep {g.time}")
                covered.add((q, g.time))
        if len(covered) != self.n_qubits * self.n_steps:
            raise CircuitError("coverage is not total: some (qubit, timestep) site has no gate")

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def gates_at(self, time: int) -> tuple[Gate, ...]:
        return tuple(g for g in self.gates if g.time == time)

    def gate_on(self, qubit: int, time: int) -> Gate:
        for g in self.gates:
            if g.time == time and qubit in g.qubits:
                return g
        raise KeyError((qubit, time))


def _assemble(n_qubits: int, step_gates: list[list[tuple[str, tuple[int, ...]]]]) -> Circuit:
    """Fill identities, order each step by smallest qubit, assign ids.

    ``step_gates[t]`` lists the explicit gates of timestep t+1 as
    (kind, qubits) pairs, already validated for range/arity/duplication.
    """
    gates: list[Gate] = []
    for t0, row in enumerate(step_gates):
        time = t0 + 1
        used = {q for _, qs in row for q in qs}
        full = list(row) + [(IDENTITY, (q,)) for q in range(n_qubits) if q not in used]
        full.sort(key=lambda item: min(item[1]))
        for kind, qubits in full:
            gates.append(Gate(id=len(gates), kind=kind, qubits=qubits, time=time))
    return Circuit(n_qubits=n_qubits, n_steps=len(step_gates), gates=tuple(gates))


# ── parsing ─────────────────────────────────────────────────────────────────

_TOKEN = re.compile(r"[^\s;]+|;")


def _tokenize(line: str) -> list[tuple[str, int]]:
    """(token, 1-based column) pairs; text after '#' is comment."""
    body = line.split("#", 1)[0]
    return [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]


def parse_circuit(text: str, max_arity: int = DEFAULT_MAX_ARITY) -> Circuit:
    """Parse circuit text; raise :class:`CircuitParseError` with position on bad input."""
    if max_arity < 1:
        raise CircuitError(f"max_arity must be >= 1, got {max_arity}")
    n_qubits: int | None = None
    step_gates: list[list[tuple[str, tuple[int, ...]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(raw)
        if not tokens:
            continue
        word, col = tokens[0]
        if n_qubits is None:
            if word != "qubits":
                raise CircuitParseError("expected 'qubits <N>' before any step", lineno, col)
            if len(tokens) != 2 or not tokens[1][0].isdigit():
                raise CircuitParseError("expected a qubit count after 'qubits'", lineno,
                                        tokens[1][1] if len(tokens) > 1 else col + len(word))
            n_qubits = int(tokens[1][0])
            if n_qubits == 0:
                raise CircuitParseError("zero qubits declared", lineno, tokens[1][1])
            continue
        if word != "step:":
            raise CircuitParseError("expected 'step:'", lineno, col)
        step_gates.append(_parse_step(tokens[1:], n_qubits, max_arity, lineno))
    if n_qubits is None:
        raise CircuitParseError("empty circuit: no 'qubits' line", 1, 1)
    return _assemble(n_qubits, step_gates)


def _parse_step(tokens: list[tuple[str, int]], n_qubits: int, max_arity: int,
                lineno: int) -> list[tuple[str, tuple[int, ...]]]:
    # split on ';' tokens into gate chunks
    chunks: list[list[tuple[str, int]]] = [[]]
    for tok, col in tokens:
        if tok == ";":
            chunks.append([])
        else:
            chunks[-1].append((tok, col))
    if all(not c for c in chunks):
        return []  # identity-only step
    gates: list[tuple[str, tuple[int, ...]]] = []
    seen_in_step: dict[int, int] = {}
    for chunk in chunks:
        if not chunk:
            raise CircuitParseError("empty gate between ';'", lineno, 1)
        (name, name_col), rest = chunk[0], chunk[1:]
        if name.isdigit():
            raise CircuitParseError(f"expected a gate name, got '{name}'", lineno, name_col)
        if not rest:
            raise CircuitParseError(f"gate '{name}' needs at least one qubit", lineno, name_col)
        if len(rest) > max_arity:
            raise CircuitParseError(f"gate '{name}' has {len(rest)} qubits, max arity is {max_arity}",
                                    lineno, rest[max_arity][1])
        qubits: list[int] = []
        for tok, col in rest:
            if not tok.isdigit():
                raise CircuitParseError(f"expected a qubit index, got '{tok}'", lineno, col)
            q = int(tok)
            if q >= n_qubits:
                raise CircuitParseError(f"qubit index out of range: {q} (declared {n_qubits})",
                                        lineno, col)
            if q in qubits:
                raise CircuitParseError(f"duplicate qubit in gate: {q}", lineno, col)
            if q in seen_in_step:
                raise CircuitParseError(f"qubit {q} already used in this step", lineno, col)
            qubits.append(q)
        for q in qubits:
            seen_in_step[q] = lineno
        gates.append((name, tuple(qubits)))
    return gates


def serialize_circuit(circuit: Circuit) -> str:
    """Normal-form text; identities are omitted and restored on parse.

    Round trip: ``parse_circuit(serialize_circuit(c)) == c`` whenever every
    gate of ``c`` fits the parser's arity limit.
    """
    lines = [f"qubits {circuit.n_qubits}"]
    for t in range(1, circuit.n_steps + 1):
        explicit = [g for g in circuit.gates_at(t) if g.kind != IDENTITY]
        body = "; ".join(f"{g.kind} {' '.join(str(q) for q in g.qubits)}" for g in explicit)
        lines.append(f"step: {body}" if body else "step:")
    return "\n".join(lines) + "\n"


# ── deterministic generators ────────────────────────────────────────────────


def generate_lattice_circuit(n_qubits: int, n_steps: int, seed: int) -> Circuit:
    """Nearest-neighbour circuit: per step, a random mix of 1-qubit gates and
    2-qubit gates on adjacent pairs (q, q+1), the rest identities.

    Deterministic in (n_qubits, n_steps, seed).
    """
    if n_qubits < 2:
        raise CircuitError("lattice circuit needs at least 2 qubits")
    if n_steps < 1:
        raise CircuitError("lattice circuit needs at least 1 step")
    rng = CounterRng(seed)
    step_gates: list[list[tuple[str, tuple[int, ...]]]] = []
    for _ in range(n_steps):
        row: list[tuple[str, tuple[int, ...]]] = []
        q = 0
        while q < n_qubits:
            u = rng.random()
            if q + 1 < n_qubits and u < 0.4:
                row.append(("CX", (q, q + 1)))
                q += 2
            elif u < 0.7:
                row.append((rng.choice(_ONE_QUBIT_KINDS), (q,)))
                q += 1
            else:
                q += 1  # identity, filled by _assemble
        step_gates.append(row)
    return _assemble(n_qubits, step_gates)


def generate_random_circuit(n_qubits: int, n_steps: int, max_arity: int, seed: int) -> Circuit:
    """Unstructured circuit: each step partitions all qubits into gate supports
    of size <= max_arity, grouping arbitrary (not just adjacent) qubits.

    Deterministic in all arguments.
    """
    if n_qubits < 1:
        raise CircuitError("circuit needs at least one qubit")
    if n_steps < 1:
        raise CircuitError("circuit needs at least 1 step")
    if not 1 <= max_arity <= n_qubits:
        raise CircuitError(f"max_arity must be in 1..{n_qubits}, got {max_arity}")
    rng = CounterRng(seed)
    step_gates: list[list[tuple[str, tuple[int, ...]]]] = []
    for _ in range(n_steps):
        order = list(range(n_qubits))
        rng.shuffle(order)
        row: list[tuple[str, tuple[int, ...]]] = []
        i = 0
        while i < n_qubits:
            size = 1 + rng.randrange(min(max_arity, n_qubits - i))
            support = tuple(order[i:i + size])
            i += size
            if size == 1:
                kind = rng.choice(_ONE_QUBIT_KINDS)
            elif size == 2:
                kind = rng.choice(_TWO_QUBIT_KINDS)
            elif size == 3:
                kind = rng.choice(_THREE_QUBIT_KINDS)
            else:
                kind = f"G{size}"
            row.append((kind, support))
        step_gates.append(row)
    return _assemble(n_qubits, step_gates)
