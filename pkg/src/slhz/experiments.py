"""Figure-shaped experiments.

Each command takes a config dict, a master seed and a thread count and
returns ``{file name: contents}``. Outputs depend only on (config, seed), so
a run manifest is enough to regenerate them byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import noise_channel as bsc
from .bf_decoder import DecoderConfig, decode, iterate_rounds, outcome_codes
from .energy import Weights
from .io import (
    ensemble_to_bytes,
    instance_to_json,
    read_instance,
    spin_matrix_to_text,
    syndromes_to_text,
)
from .oracle import ProblemInstance, brute_force_ground, random_instance, unique_instance
from .parity_code import encode, plaquette_syndromes
from .sampler import (
    Ensemble,
    SamplerParams,
    best_points,
    ensemble_stats,
    hard_decision,
    hybrid_solve,
    param_sweep,
    sample_ensemble,
    sweep_point,
)
from .seeding import child_seed

Outputs = dict[str, str | bytes]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class Command:
    name: str
    defaults: dict[str, Any]
    run: Callable[[dict, int, int], Outputs]
    help: str = ""


def _csv(rows: list[dict], cols: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if v is None:
        return ""
    return str(v)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(type(o))


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _p_list(values) -> list[float]:
    ps = [float(p) for p in values]
    _require(all(0 <= p < 1 for p in ps), "p values must lie in [0, 1)")
    return ps


def _weights(beta, gamma) -> Weights:
    _require(float(beta) > 0 and float(gamma) > 0, "beta and gamma must be > 0")
    return Weights(float(beta), float(gamma))


def _sampler(cfg: dict, seed: int, name: str) -> SamplerParams:
    _require(int(cfg["steps"]) >= 1, "steps must be >= 1")
    _require(int(cfg["record_every"]) >= 1, "record_every must be >= 1")
    _require(int(cfg.get("chains", 1)) >= 1, "chains must be >= 1")
    burn = cfg.get("burn_in")
    _require(burn is None or 0 <= int(burn) <= int(cfg["steps"]), "need 0 <= burn_in <= steps")
    return SamplerParams(
        steps=int(cfg["steps"]),
        burn_in=None if burn is None else int(burn),
        record_every=int(cfg["record_every"]),
        chains=int(cfg.get("chains", 1)),
        seed=child_seed(seed, name),
    )


# BSC experiments


def run_fig4(cfg: dict, seed: int, threads: int) -> Outputs:
    _require(int(cfg["trials"]) >= 1, "trials must be >= 1")
    ps = cfg.get("p_values") or bsc.fig4_grid(int(cfg["points"])).tolist()
    ps = _p_list(ps)
    rows = bsc.mlg_update_table([int(n) for n in cfg["n_values"]], ps, int(cfg["trials"]), seed)
    return {"fig4.csv": _csv(rows, ["p", "n", "trials", "P_correct", "P_incorrect", "stderr"])}


def run_fig5(cfg: dict, seed: int, threads: int) -> Outputs:
    n, p, rounds = int(cfg["n"]), float(cfg["p"]), int(cfg["rounds"])
    _require(n >= 3, "n must be >= 3")
    _p_list([p])
    e = bsc.random_error_matrix(n, p, seed)
    out: Outputs = {}
    rows = []
    for t, cur in enumerate(iterate_rounds(np.asarray(e)[None], rounds)):
        m = cur[0]
        out[f"round{t}_spins.txt"] = spin_matrix_to_text(m)
        out[f"round{t}_syndromes.txt"] = syndromes_to_text(m)
        rows.append(
            {
                "round": t,
                "spin_errors": int(np.count_nonzero(np.triu(m, 1) == -1)),
                "violated_plaquettes": int(np.count_nonzero(plaquette_syndromes(m) == -1)),
            }
        )
    out["fig5_counts.csv"] = _csv(rows, ["round", "spin_errors", "violated_plaquettes"])
    return out


def _sweep_args(cfg: dict):
    ns = [int(n) for n in cfg["n_values"]]
    _require(all(n >= 2 for n in ns), "n values must be >= 2")
    _require(int(cfg["trials"]) >= 1 and int(cfg["rounds"]) >= 1, "trials and rounds must be >= 1")
    return ns, _p_list(cfg["p_values"]), int(cfg["trials"]), int(cfg["rounds"])


def run_bsc_sweep(cfg: dict, seed: int, threads: int) -> Outputs:
    ns, ps, trials, rounds = _sweep_args(cfg)
    table = bsc.failure_prob_sweep(ns, ps, trials, rounds, seed, threads)
    return {"bsc_sweep.csv": table.to_csv()}


def run_fig6(cfg: dict, seed: int, threads: int) -> Outputs:
    ns, ps, trials, rounds = _sweep_args(cfg)
    table = bsc.failure_prob_sweep(ns, ps, trials, rounds, seed, threads)
    return {"fig6a.csv": table.to_csv()}


def run_fig7(cfg: dict, seed: int, threads: int) -> Outputs:
    n = int(cfg["n"])
    _require(n >= 2, "n must be >= 2")
    ps = _p_list(cfg["p_values"])
    trials, rounds = int(cfg["trials"]), int(cfg["rounds"])
    _require(trials >= 1 and rounds >= 1, "trials and rounds must be >= 1")
    a = bsc.round_saturation_sweep(n, ps, trials, rounds, seed, threads)
    b = bsc.logical_error_histogram(n, ps, trials, rounds, seed, threads)
    return {"fig7a.csv": a.to_csv(), "fig7b.csv": b.to_csv()}


# Instance and sampler experiments


def load_or_generate(cfg: dict, seed: int) -> ProblemInstance:
    if cfg.get("instance"):
        inst = read_instance(cfg["instance"])
    else:
        n = int(cfg["n"])
        _require(n >= 2, "n must be >= 2")
        inst_seed = cfg.get("instance_seed")
        inst_seed = child_seed(seed, "instance") if inst_seed is None else int(inst_seed)
        if cfg.get("require_unique", True):
            inst = unique_instance(n, inst_seed)
        else:
            inst = random_instance(n, inst_seed)
    return inst


def run_gen(cfg: dict, seed: int, threads: int) -> Outputs:
    n = int(cfg["n"])
    _require(n >= 2, "n must be >= 2")
    inst_seed = cfg.get("instance_seed")
    inst = random_instance(n, seed if inst_seed is None else int(inst_seed))
    if cfg.get("solve"):
        inst = inst.solved()
    return {"instance.json": _json(instance_to_json(inst))}


def run_solve_exact(cfg: dict, seed: int, threads: int) -> Outputs:
    inst = load_or_generate(cfg, seed)
    _require(inst.n <= 26, "exact solve limited to n <= 26")
    inst = ProblemInstance(inst.J, inst.seed, brute_force_ground(inst.J))
    return {"instance.json": _json(instance_to_json(inst))}


def _grid(cfg: dict) -> list[Weights]:
    return [_weights(b, g) for b in cfg["betas"] for g in cfg["gammas"]]


def _sweep_rows(points) -> list[dict]:
    return [p.as_row() for p in points]


SWEEP_COLS = [
    "beta",
    "gamma",
    "readouts",
    "raw_error_free",
    "raw_code",
    "decoded_error_free",
    "decoded_code",
    "mean_error_prob",
    "best_energy",
]


def run_sample(cfg: dict, seed: int, threads: int) -> Outputs:
    inst = load_or_generate(cfg, seed)
    w = _weights(cfg["beta"], cfg["gamma"])
    params = _sampler(cfg, seed, "sample")
    ens, finals = sample_ensemble(inst.J, w, params)
    blob = ensemble_to_bytes(ens)
    summary: dict[str, Any] = {
        "n": inst.n,
        "readouts": len(ens),
        "best_energy": min(f.best_energy for f in finals),
        "mean_energy": float(ens.energies.mean()) if len(ens) else None,
    }
    if inst.ground is not None and len(ens):
        st = ensemble_stats(ens, inst.ground.Z)
        summary.update(
            error_free_rate=st.error_free_rate,
            code_state_rate=st.code_state_rate,
            mean_error_prob=st.mean_error_prob,
        )
    return {"ensemble.bin": blob, "summary.json": _json(summary)}


def run_sweep(cfg: dict, seed: int, threads: int) -> Outputs:
    inst = load_or_generate(cfg, seed).solved()
    params = _sampler(cfg, seed, "sweep")
    points = param_sweep(inst.J, _grid(cfg), params, inst.ground.Z, DecoderConfig(int(cfg["max_rounds"])), threads)
    return {"sweep.csv": _csv(_sweep_rows(points), SWEEP_COLS)}


def _hybrid_report(inst: ProblemInstance, res, w: Weights) -> dict:
    ground = inst.ground
    out = {
        "beta": w.beta,
        "gamma": w.gamma,
        "hybrid": {
            "Z": None if res.Z is None else [int(v) for v in res.Z],
            "energy": None if res.Z is None else res.energy,
            "candidates": res.candidates,
            "best_chain_energy": res.best_chain_energy,
        },
        "hard_decision": {
            "classification": res.baseline.classification.label(),
            "rounds_used": res.baseline.rounds_used,
            "Z": None if res.baseline_Z is None else [int(v) for v in res.baseline_Z],
            "energy": res.baseline_energy,
        },
    }
    if ground is not None:
        out["ground"] = {"Z": [int(v) for v in ground.Z], "energy": ground.energy, "unique": ground.unique}
        out["hybrid"]["exact"] = res.Z is not None and bool(np.array_equal(encode(res.Z), encode(ground.Z)))
        if res.Z is not None:
            out["hybrid"]["classification"] = res.details.get("classification")
    return out


def run_hybrid(cfg: dict, seed: int, threads: int) -> Outputs:
    inst = load_or_generate(cfg, seed)
    if inst.ground is None and inst.n <= int(cfg.get("solve_max_n", 20)):
        inst = inst.solved()
    w = _weights(cfg["beta"], cfg["gamma"])
    params = _sampler(cfg, seed, "hybrid")
    dcfg = DecoderConfig(int(cfg["max_rounds"]))
    target = None if inst.ground is None else inst.ground.Z
    res = hybrid_solve(inst.J, w, params, dcfg, target=target)
    report = _hybrid_report(inst, res, w)
    neg = decode(hard_decision(-inst.J), dcfg, target=None if target is None else brute_force_ground(-inst.J).Z)
    report["hard_decision_negated"] = {"classification": neg.classification.label(), "rounds_used": neg.rounds_used}
    out: Outputs = {"hybrid.json": _json(report)}
    for t, m in enumerate(res.baseline.trace):
        out[f"hard_decision_round{t}.txt"] = spin_matrix_to_text(m)
    return out


def round_histogram(ens: Ensemble, target, rounds: int) -> list[dict]:
    """Outcome fractions by logical-error count after 0..rounds decoding rounds."""
    rows = []
    n = ens.n
    for t, cur in enumerate(iterate_rounds(ens.matrices(), rounds)):
        codes = outcome_codes(cur, target)
        total = codes.size
        for m in range(n // 2 + 1):
            rows.append({"round": t, "bucket": str(m), "fraction": int(np.count_nonzero(codes == m)) / total})
        rows.append({"round": t, "bucket": "non_code", "fraction": int(np.count_nonzero(codes < 0)) / total})
    return rows


def _marginal_rows(per_spin: np.ndarray) -> list[dict]:
    n = per_spin.shape[0]
    return [
        {"i": i + 1, "j": j + 1, "error_prob": float(per_spin[i, j])}
        for i in range(n)
        for j in range(i + 1, n)
    ]


def _first_error_free_trace(ens: Ensemble, target, rounds: int):
    """Decode trace of the first readout that decodes to the target, if any."""
    mats = ens.matrices()
    final = None
    for final in iterate_rounds(mats, rounds):
        pass
    codes = outcome_codes(final, target)
    hits = np.flatnonzero(codes == 0)
    if hits.size == 0:
        return None
    return decode(mats[hits[0]], DecoderConfig(rounds), target=target, keep_trace=True)


def run_fig8910(cfg: dict, seed: int, threads: int) -> Outputs:
    inst = load_or_generate(cfg, seed).solved()
    _require(inst.n <= 26, "exact ground state needs n <= 26")
    target = inst.ground.Z
    rounds = int(cfg["max_rounds"])
    dcfg = DecoderConfig(rounds)
    params = _sampler(cfg, seed, "fig8910")
    grid = _grid(cfg)
    points = param_sweep(inst.J, grid, params, target, dcfg, threads)
    out: Outputs = {"instance.json": _json(instance_to_json(inst))}
    out["fig9_sweep.csv"] = _csv(_sweep_rows(points), SWEEP_COLS)

    best = best_points(points)
    report: dict[str, Any] = {
        "instance_seed": inst.seed,
        "ground": {"Z": [int(v) for v in target], "energy": inst.ground.energy, "unique": inst.ground.unique},
        "raw_optimum": best["raw"].as_row(),
        "decoded_optimum": best["decoded"].as_row(),
        "decoded_ge_raw_everywhere": all(p.decoded_error_free >= p.raw_error_free for p in points),
        "case_b_points": [
            p.as_row() for p in points if p.raw_error_free < 0.01 and p.decoded_error_free > 0.2
        ],
    }
    for label, pt in (("raw_opt", best["raw"]), ("decoded_opt", best["decoded"])):
        idx = next(i for i, p in enumerate(points) if p is pt)
        _, ens = sweep_point(inst.J, grid[idx], params, target, dcfg, idx)
        st = ensemble_stats(ens, target)
        out[f"fig8_marginals_{label}.csv"] = _csv(_marginal_rows(st.per_spin_error_prob), ["i", "j", "error_prob"])
        out[f"fig9_rounds_{label}.csv"] = _csv(round_histogram(ens, target, rounds), ["round", "bucket", "fraction"])
        if label == "decoded_opt":
            tr = _first_error_free_trace(ens, target, rounds)
            if tr is not None:
                for t, m in enumerate(tr.trace):
                    out[f"fig10b_round{t}.txt"] = spin_matrix_to_text(m)

    w_dec = grid[next(i for i, p in enumerate(points) if p is best["decoded"])]
    res = hybrid_solve(inst.J, w_dec, _sampler(cfg, seed, "fig8910-hybrid"), dcfg, target=target)
    report["fig10"] = _hybrid_report(inst, res, w_dec)
    neg = decode(hard_decision(-inst.J), dcfg, target=brute_force_ground(-inst.J).Z)
    report["fig10"]["hard_decision_negated"] = {
        "classification": neg.classification.label(),
        "rounds_used": neg.rounds_used,
    }
    for t, m in enumerate(res.baseline.trace):
        out[f"fig10a_round{t}.txt"] = spin_matrix_to_text(m)
    out["report.json"] = _json(report)
    return out


def run_decode(cfg: dict, seed: int, threads: int) -> Outputs:
    from .io import parse_logical, read_spin_matrix

    _require(bool(cfg.get("input")), "decode needs an input spin matrix file")
    r = read_spin_matrix(cfg["input"])
    target = None
    if cfg.get("target") is not None:
        t = cfg["target"]
        target = parse_logical(t if isinstance(t, str) else json.dumps(t))
        _require(target.size == r.n, "target length does not match n")
    res = decode(r, DecoderConfig(int(cfg["max_rounds"])), target=target, keep_trace=bool(cfg["dump"]))
    out: Outputs = {"decode.json": _json(res.to_dict())}
    for t, m in enumerate(res.trace):
        out[f"round{t}_spins.txt"] = spin_matrix_to_text(m)
        out[f"round{t}_syndromes.txt"] = syndromes_to_text(m)
    return out


FIG6_N = [2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 20, 24, 28, 32, 36, 40]
FIG6_P = [0.05, 0.07, 0.1, 0.15, 0.2, 0.3, 0.4]
FIG7_P = [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]

SAMPLER_DEFAULTS = {"steps": 600_000, "burn_in": 100_000, "record_every": 200, "chains": 4}

COMMANDS: dict[str, Command] = {
    c.name: c
    for c in [
        Command("decode", {"input": None, "target": None, "max_rounds": 7, "dump": False}, run_decode,
                "bit-flip decode one spin matrix file"),
        Command("fig4", {"n_values": [14, 40], "points": 50, "p_values": None, "trials": 1_000_000}, run_fig4,
                "coin-toss estimate of the one-round correct-decision probability"),
        Command("fig5", {"n": 40, "p": 0.3, "rounds": 4}, run_fig5,
                "per-round spin and syndrome dumps for one error matrix"),
        Command("bsc-sweep", {"n_values": [40], "p_values": [0.3], "trials": 5000, "rounds": 5}, run_bsc_sweep,
                "decoding failure probability over an (n, p) grid"),
        Command("fig6", {"n_values": FIG6_N, "p_values": FIG6_P, "trials": 1000, "rounds": 5}, run_fig6,
                "failure probability against n for seven p values"),
        Command("fig7", {"n": 40, "p_values": FIG7_P, "trials": 1000, "rounds": 7}, run_fig7,
                "error-free fraction per round and logical-error histogram"),
        Command("gen", {"n": 14, "instance_seed": None, "solve": False}, run_gen,
                "random coupling instance"),
        Command("solve-exact", {"instance": None, "n": 14, "instance_seed": None, "require_unique": False},
                run_solve_exact, "exhaustive ground state of an instance"),
        Command("sample", {"instance": None, "n": 14, "instance_seed": None, "beta": 12.0, "gamma": 4.2,
                           **SAMPLER_DEFAULTS}, run_sample, "rejection-free chain to an ensemble file"),
        Command("sweep", {"instance": None, "n": 14, "instance_seed": None, "betas": [5.0, 8.0, 12.0],
                          "gammas": [3.0, 4.2, 6.0], "max_rounds": 7, **SAMPLER_DEFAULTS}, run_sweep,
                "raw and decoded success over a (beta, gamma) grid"),
        Command("hybrid", {"instance": None, "n": 14, "instance_seed": None, "beta": 12.0, "gamma": 4.2,
                           "max_rounds": 7, **SAMPLER_DEFAULTS}, run_hybrid,
                "anneal-then-decode solve with the hard-decision baseline"),
        Command("fig8910", {"instance": None, "n": 14, "instance_seed": 20, "max_rounds": 7,
                            "betas": [5.0, 8.0, 10.0, 12.0, 14.0], "gammas": [3.0, 3.5, 4.0, 4.2, 4.5, 5.0, 6.0],
                            **SAMPLER_DEFAULTS}, run_fig8910,
                "ensemble statistics, decode-of-samples and hybrid traces"),
    ]
}
