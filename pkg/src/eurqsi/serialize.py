"""Scenario files and canonical JSON output.

A scenario is a JSON object with keys ``dims``, ``state``, ``x_pvm`` and
``z_pvm``; complex matrices are nested lists of ``[re, im]`` pairs.  Floats
are always written with 17 significant digits so that serialization round
trips bit-exactly.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .recovery import CpMap
from .states import DensityOperator, InvalidStateError, Pvm


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    try:
        rows = [[complex(entry[0], entry[1]) for entry in row] for row in data]
    except (TypeError, IndexError) as exc:
        raise InvalidStateError(f"malformed complex matrix: {exc}") from exc
    return np.array(rows, dtype=complex)


def _default_labels(n: int) -> tuple[str, ...]:
    if n == 1:
        return ("A",)
    if n == 2:
        return ("A", "B")
    return ("A",) + tuple(f"B{i}" for i in range(n - 1))


def scenario_to_dict(rho: DensityOperator, x_pvm: Pvm, z_pvm: Pvm) -> dict:
    return {
        "dims": list(rho.dims),
        "state": encode_matrix(rho.matrix),
        "x_pvm": [encode_matrix(p) for p in x_pvm.projectors],
        "z_pvm": [encode_matrix(p) for p in z_pvm.projectors],
    }


def scenario_from_dict(data: dict) -> tuple[DensityOperator, Pvm, Pvm]:
    """Decode and validate a scenario; subsystem 0 is the measured one."""
    for key in ("dims", "state", "x_pvm", "z_pvm"):
        if key not in data:
            raise InvalidStateError(f"scenario is missing required key {key!r}")
    dims = tuple(int(d) for d in data["dims"])
    rho = DensityOperator(decode_matrix(data["state"]), dims, _default_labels(len(dims)))
    x_pvm = Pvm(tuple(decode_matrix(p) for p in data["x_pvm"]))
    z_pvm = Pvm(tuple(decode_matrix(p) for p in data["z_pvm"]))
    if x_pvm.dim != dims[0] or z_pvm.dim != dims[0]:
        raise InvalidStateError("PVM dimension does not match measured subsystem")
    return rho, x_pvm, z_pvm


def save_scenario(path, rho: DensityOperator, x_pvm: Pvm, z_pvm: Pvm) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(scenario_to_dict(rho, x_pvm, z_pvm)))
        fh.write("\n")


def load_scenario(path) -> tuple[DensityOperator, Pvm, Pvm]:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidStateError("scenario file must contain a JSON object")
    return scenario_from_dict(data)


def cpmap_to_dict(cpmap: CpMap) -> dict:
    """Export a CP map (Choi matrix plus metadata) in the scenario dialect."""
    out = {
        "choi": encode_matrix(cpmap.choi),
        "in_dims": list(cpmap.in_dims),
        "out_dims": list(cpmap.out_dims),
        "in_labels": list(cpmap.in_labels),
        "out_labels": list(cpmap.out_labels),
    }
    if cpmap.support is not None:
        out["support"] = encode_matrix(cpmap.support)
    return out


def cpmap_from_dict(data: dict) -> CpMap:
    support = data.get("support")
    return CpMap(
        choi=decode_matrix(data["choi"]),
        in_dims=tuple(int(d) for d in data["in_dims"]),
        out_dims=tuple(int(d) for d in data["out_dims"]),
        support=None if support is None else decode_matrix(support),
        in_labels=tuple(data.get("in_labels", ())),
        out_labels=tuple(data.get("out_labels", ())),
    )


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    # keep a decimal point so json.load returns a float ("-0" would parse
    # as int and drop the sign of zero)
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def canonical_json(obj, indent: int = 2) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    pieces: list[str] = []
    _write_json(obj, pieces, 0, indent)
    return "".join(pieces)


def _write_json(obj, out: list[str], level: int, indent: int) -> None:
    pad, pad_in = " " * (indent * level), " " * (indent * (level + 1))
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        keys = sorted(str(k) for k in obj)
        if not keys:
            out.append("{}")
            return
        out.append("{\n")
        for i, k in enumerate(keys):
            out.append(f"{pad_in}{json.dumps(k)}: ")
            _write_json(obj[k], out, level + 1, indent)
            out.append(",\n" if i < len(keys) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        # short numeric rows stay on one line for readability
        if all(isinstance(v, (int, float, np.integer, np.floating)) and
               not isinstance(v, bool) for v in items) and len(items) <= 8:
            out.append("[")
            for i, v in enumerate(items):
                _write_json(v, out, 0, 0)
                if i < len(items) - 1:
                    out.append(", ")
            out.append("]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad_in)
            _write_json(v, out, level + 1, indent)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
