"""File formats: spin matrices, syndromes, couplings, instances, ensembles.

Spin-matrix text format::

    <n>
    <n(n-1)/2 characters '+'/'-', row-major upper triangle>

Whitespace inside the character block is ignored on read.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .energy import CouplingMatrix
from .oracle import GroundState, ProblemInstance
from .parity_code import (
    SpinMatrix,
    from_sign_string,
    make_spin_matrix,
    num_physical,
    plaquette_syndromes,
    to_sign_string,
)
from .sampler import Ensemble

ENSEMBLE_FORMAT = "slhz-ensemble"


def spin_matrix_to_text(r) -> str:
    r = r if isinstance(r, SpinMatrix) else SpinMatrix(r)
    return f"{r.n}\n{to_sign_string(r.upper())}\n"


def spin_matrix_from_text(text: str) -> SpinMatrix:
    lines = text.split(None, 1)
    if not lines:
        raise ValueError("empty spin matrix text")
    n = int(lines[0])
    body = "".join(lines[1].split()) if len(lines) > 1 else ""
    return make_spin_matrix(n, from_sign_string(body))


def spin_matrix_to_json(r) -> dict:
    r = r if isinstance(r, SpinMatrix) else SpinMatrix(r)
    return {"n": r.n, "spins": to_sign_string(r.upper())}


def spin_matrix_from_json(obj: dict) -> SpinMatrix:
    return make_spin_matrix(int(obj["n"]), from_sign_string(obj["spins"]))


def read_spin_matrix(path) -> SpinMatrix:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return spin_matrix_from_json(json.loads(text))
    return spin_matrix_from_text(text)


def write_spin_matrix(path, r) -> None:
    Path(path).write_text(spin_matrix_to_text(r))


def syndromes_to_text(r) -> str:
    """Plaquette syndromes in enumeration order, same layout as a spin matrix."""
    r = np.asarray(r)
    return f"{r.shape[0]}\n{to_sign_string(plaquette_syndromes(r))}\n"


def parse_logical(text: str) -> np.ndarray:
    """Logical state from '+-+-' or a JSON list of +/-1."""
    text = text.strip()
    if text.startswith("["):
        vals = json.loads(text)
    else:
        vals = from_sign_string(text)
    Z = np.array(vals, dtype=np.int8)
    if Z.ndim != 1 or not np.all(np.abs(Z) == 1):
        raise ValueError("logical state must be a list of +1/-1")
    return Z


# Couplings

def couplings_to_json(J: CouplingMatrix) -> dict:
    return {"n": J.n, "couplings": [float(v) for v in J.upper()]}


def couplings_from_json(obj: dict) -> CouplingMatrix:
    return CouplingMatrix.from_upper(int(obj["n"]), [float(v) for v in obj["couplings"]])


def couplings_to_csv(J: CouplingMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(J):
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def couplings_from_csv(text: str) -> CouplingMatrix:
    rows = [[float(v) for v in row] for row in csv.reader(io.StringIO(text)) if row]
    return CouplingMatrix(np.array(rows))


def read_couplings(path) -> CouplingMatrix:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return couplings_from_json(obj)
    return couplings_from_csv(text)


# Instances

def instance_to_json(inst: ProblemInstance) -> dict:
    out = {"n": inst.n, "seed": inst.seed, "couplings": [float(v) for v in inst.J.upper()]}
    if inst.ground is not None:
        out["ground"] = {
            "Z": [int(v) for v in inst.ground.Z],
            "energy": inst.ground.energy,
            "unique": inst.ground.unique,
        }
    return out


def instance_from_json(obj: dict) -> ProblemInstance:
    J = CouplingMatrix.from_upper(int(obj["n"]), [float(v) for v in obj["couplings"]])
    ground = None
    if obj.get("ground") is not None:
        g = obj["ground"]
        ground = GroundState(np.array(g["Z"], dtype=np.int8), float(g["energy"]), bool(g["unique"]))
    return ProblemInstance(J, int(obj.get("seed", 0)), ground)


def read_instance(path) -> ProblemInstance:
    return instance_from_json(json.loads(Path(path).read_text()))


def write_instance(path, inst: ProblemInstance) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=2) + "\n")


# Ensembles: JSON header line, packed readouts, little-endian float64 energies

def ensemble_to_bytes(ens: Ensemble) -> bytes:
    header = {
        "format": ENSEMBLE_FORMAT,
        "version": 1,
        "n": ens.n,
        "count": len(ens),
        "config": ens.config,
    }
    packed = np.packbits(ens.spins == -1, axis=1)
    return (
        json.dumps(header, sort_keys=True).encode()
        + b"\n"
        + packed.tobytes()
        + ens.energies.astype("<f8").tobytes()
    )


def write_ensemble(path, ens: Ensemble) -> None:
    Path(path).write_bytes(ensemble_to_bytes(ens))


def read_ensemble(path) -> Ensemble:
    data = Path(path).read_bytes()
    nl = data.index(b"\n")
    header = json.loads(data[:nl])
    if header.get("format") != ENSEMBLE_FORMAT:
        raise ValueError("not an ensemble file")
    n, count = int(header["n"]), int(header["count"])
    m = num_physical(n)
    width = (m + 7) // 8
    body = data[nl + 1 :]
    if len(body) != count * (width + 8):
        raise ValueError("ensemble file is truncated or corrupt")
    packed = np.frombuffer(body[: count * width], dtype=np.uint8).reshape(count, width)
    bits = np.unpackbits(packed, axis=1, count=m)
    spins = np.where(bits == 1, -1, 1).astype(np.int8)
    energies = np.frombuffer(body[count * width :], dtype="<f8").astype(np.float64)
    return Ensemble(n, spins, energies, header.get("config", {}))
