"""Gate-level compiler for the pruned thermometer-to-binary encoder.

Independent of the proxy area model: builds the actual combinational
structure (a one-hot stage feeding per-bit OR trees), simulates it, counts
gates, and emits structural Verilog.  Used as the functional and gate-count
oracle for the behavioral ADC model and the area proxy.

Construction rule: for each surviving level l the one-hot line is
``T(l) AND NOT T(next)`` where `next` is the next *surviving* level above l;
the topmost surviving level's one-hot is its thermometer line directly.
Output bit i is an OR tree over the one-hot lines of surviving levels whose
binary code has bit i set.  Wires (single-input trees) and constant-zero
outputs (empty trees) are elided at build time, so the gate list is already
the post-simplification structure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .adc import LevelMask, MaskError

ZERO = "zero"  # reserved net name: constant 0

GATE_KINDS = ("AND2", "OR2", "INV")


class SimulationError(ValueError):
    """Raised for invalid simulation stimuli (non-monotone thermometer)."""


@dataclass(frozen=True)
class Gate:
    kind: str
    ins: tuple[str, ...]
    out: str


@dataclass(frozen=True)
class Netlist:
    """Immutable structural encoder netlist.

    `inputs` are the thermometer lines t<level> for surviving levels,
    ascending.  `gates` are topologically ordered.  `outputs[i]` drives
    binary output bit i (LSB first) and may name a gate output, an input,
    or the ZERO constant.
    """

    bitwidth: int
    mask: LevelMask
    inputs: tuple[str, ...]
    gates: tuple[Gate, ...]
    outputs: tuple[str, ...]


def compile_encoder(bitwidth: int, mask: LevelMask) -> Netlist:
    if len(mask.bits) != 2**bitwidth - 1:
        raise MaskError(
            f"mask has {len(mask.bits)} bits, expected {2**bitwidth - 1} for bitwidth {bitwidth}"
        )
    survivors = mask.survivors
    inputs = tuple(f"t{lvl}" for lvl in survivors)
    gates: list[Gate] = []

    # one-hot stage: oh_l = t_l AND NOT t_next (topmost level: plain wire)
    one_hot: dict[int, str] = {}
    for pos, lvl in enumerate(survivors):
        if pos == len(survivors) - 1:
            one_hot[lvl] = f"t{lvl}"
        else:
            nxt = survivors[pos + 1]
            inv = f"tn{nxt}"
            gates.append(Gate("INV", (f"t{nxt}",), inv))
            oh = f"oh{lvl}"
            gates.append(Gate("AND2", (f"t{lvl}", inv), oh))
            one_hot[lvl] = oh

    # per-bit OR trees, balanced pairwise reduction
    outputs = []
    for bit in range(bitwidth):
        members = [one_hot[lvl] for lvl in survivors if lvl >> bit & 1]
        if not members:
            outputs.append(ZERO)
            continue
        counter = 0
        while len(members) > 1:
            merged = []
            for k in range(0, len(members) - 1, 2):
                out = f"b{bit}n{counter}"
                counter += 1
                gates.append(Gate("OR2", (members[k], members[k + 1]), out))
                merged.append(out)
            if len(members) % 2:
                merged.append(members[-1])
            members = merged
        outputs.append(members[0])

    return Netlist(
        bitwidth=bitwidth,
        mask=mask,
        inputs=inputs,
        gates=tuple(gates),
        outputs=tuple(outputs),
    )


def simulate(net: Netlist, thermometer) -> int:
    """Evaluate the netlist on one thermometer pattern; returns the binary code.

    `thermometer` holds one bit per surviving level, ascending, and must be a
    prefix of ones (a 0 below a 1 is physically impossible for a monotone
    comparator ladder and is rejected).
    """
    bits = [bool(b) for b in thermometer]
    if len(bits) != len(net.inputs):
        raise SimulationError(
            f"thermometer has {len(bits)} bits, netlist expects {len(net.inputs)}"
        )
    for lo, hi in zip(bits, bits[1:]):
        if hi and not lo:
            raise SimulationError(f"non-monotone thermometer pattern {bits}")

    values = {ZERO: False}
    values.update(zip(net.inputs, bits))
    for g in net.gates:
        a = values[g.ins[0]]
        if g.kind == "INV":
            values[g.out] = not a
        elif g.kind == "AND2":
            values[g.out] = a and values[g.ins[1]]
        elif g.kind == "OR2":
            values[g.out] = a or values[g.ins[1]]
        else:
            raise ValueError(f"unknown gate kind {g.kind}")

    code = 0
    for i, ref in enumerate(net.outputs):
        if values[ref]:
            code |= 1 << i
    return code


def count_gates(net: Netlist) -> dict[str, int]:
    counts = {kind: 0 for kind in GATE_KINDS}
    for g in net.gates:
        counts[g.kind] += 1
    return counts


def emit_hdl(net: Netlist, module_name: str = "adc_encoder") -> str:
    """Self-contained structural Verilog: INV/AND2/OR2 primitives only.

    Net names are level-indexed and the emission is deterministic, so equal
    netlists produce byte-identical text.
    """
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", module_name):
        raise ValueError(f"invalid module name {module_name!r}")
    n = net.bitwidth
    lines = [
        f"// {module_name}: thermometer-to-binary encoder, {n}-bit,"
        f" mask {net.mask.to_hex()} ({len(net.inputs)} comparator inputs)",
        f"module {module_name} (",
    ]
    for name in net.inputs:
        lines.append(f"  input  wire {name},")
    lines.append(f"  output wire [{n - 1}:0] code")
    lines.append(");")
    if ZERO in net.outputs:
        lines.append(f"  wire {ZERO};")
        lines.append(f"  assign {ZERO} = 1'b0;")
    prim = {"INV": "not", "AND2": "and", "OR2": "or"}
    for g in net.gates:
        lines.append(f"  wire {g.out};")
        lines.append(f"  {prim[g.kind]} u_{g.out} ({g.out}, {', '.join(g.ins)});")
    for i, ref in enumerate(net.outputs):
        lines.append(f"  assign code[{i}] = {ref};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


_HDL_GATE_RE = re.compile(r"^\s*(not|and|or)\s+u_\w+\s*\(")
_HDL_INPUT_RE = re.compile(r"^\s*input\s+wire\s+(\w+),")


def parse_hdl_counts(text: str) -> dict[str, int]:
    """Recover gate counts from our own emitted HDL (round-trip check)."""
    kind_of = {"not": "INV", "and": "AND2", "or": "OR2"}
    counts = {kind: 0 for kind in GATE_KINDS}
    inputs = 0
    for line in text.splitlines():
        m = _HDL_GATE_RE.match(line)
        if m:
            counts[kind_of[m.group(1)]] += 1
        elif _HDL_INPUT_RE.match(line):
            inputs += 1
    counts["inputs"] = inputs
    return counts


def to_json(net: Netlist) -> str:
    doc = {
        "bitwidth": net.bitwidth,
        "mask_hex": net.mask.to_hex(),
        "gates": [{"kind": g.kind, "in": list(g.ins), "out": g.out} for g in net.gates],
        "outputs": list(net.outputs),
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> Netlist:
    doc = json.loads(text)
    mask = LevelMask.from_hex(doc["bitwidth"], doc["mask_hex"])
    return Netlist(
        bitwidth=doc["bitwidth"],
        mask=mask,
        inputs=tuple(f"t{lvl}" for lvl in mask.survivors),
        gates=tuple(Gate(g["kind"], tuple(g["in"]), g["out"]) for g in doc["gates"]),
        outputs=tuple(doc["outputs"]),
    )
