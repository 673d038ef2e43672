"""Command-line entry point.

    corrset <command> --config <path> [--out <dir>] [--format csv|json] [--max-bits <n>]

The config is one JSON document describing one measure and the command's
parameters; rationals are given as "p/q" strings.  Artifacts go to
``--out`` (default: the current directory).  Failures print a JSON error
object on stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from corrset.core import FolnerSequence, folner_defect, upper_density
from corrset.errors import CorrsetError, InputError
from corrset.generic import (DEFAULT_MAX_BITS, DEFAULT_MAX_STAGE, REPORT_COLUMNS, BitStream,
                             convergence_report, generic_stream, manifest_json, read_prefix,
                             schedule_manifest, write_ascii, write_prefix)
from corrset.measures import as_fraction, ergodic_decomposition, measure_from_config
from corrset.reclab import (nice_intersectivity_witness, nice_recurrence_witness, r3_set,
                            recurrence_witness, shift_set_from_config, transfer_experiment, witness_sweep)

SCHEMA_VERSION = 1
COMMANDS = ("synthesize", "verify", "densities", "reclab", "decompose")


def _positive_int(cfg, key, default=None, minimum=1):
    if key not in cfg:
        if default is None:
            raise InputError(f"{key}: missing required field")
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise InputError(f"{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _rational(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise InputError(f"{key}: missing required field")
        return Fraction(default)
    try:
        q = as_fraction(cfg[key], key)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if q <= 0:
        raise InputError(f"{key}: must be positive")
    return q


def _n_grid(cfg):
    grid = cfg.get("N_grid")
    if not isinstance(grid, list) or not grid:
        raise InputError("N_grid: must be a nonempty list of integers")
    for i, N in enumerate(grid):
        if isinstance(N, bool) or not isinstance(N, int) or N < 1:
            raise InputError(f"N_grid[{i}]: expected a positive integer, got {N!r}")
        if i and N <= grid[i - 1]:
            raise InputError(f"N_grid[{i}]: grid must be strictly increasing")
    return grid


def _shift_tuples(cfg):
    tuples = cfg.get("shifts", [[0]])
    if not isinstance(tuples, list) or not tuples:
        raise InputError("shifts: must be a nonempty list of shift lists")
    out = []
    for i, t in enumerate(tuples):
        if not isinstance(t, list) or not t or not all(isinstance(s, int) and s >= 0 for s in t):
            raise InputError(f"shifts[{i}]: expected a nonempty list of nonnegative integers")
        out.append(tuple(t))
    return out


def _poly(coeffs, what):
    if not isinstance(coeffs, list) or not all(isinstance(c, int) for c in coeffs):
        raise InputError(f"{what}: expected a list of integer coefficients (constant term first)")
    return lambda N: sum(c * N ** i for i, c in enumerate(coeffs))


def _folner(cfg):
    spec = cfg.get("folner", {"kind": "initial"})
    kind = spec.get("kind") if isinstance(spec, dict) else spec
    if kind in ("initial", "initial_intervals"):
        return FolnerSequence.initial_intervals()
    if kind in ("shifted", "shifted_intervals"):
        return FolnerSequence.shifted_intervals(_poly(spec.get("offset", [0]), "folner.offset"),
                                                _poly(spec.get("length", [0, 1]), "folner.length"))
    raise InputError(f"folner.kind: unknown Følner sequence {kind!r}")


def _resolve(base: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else base / p


def _stream(cfg, args) -> BitStream:
    nu = measure_from_config(cfg.get("measure"))
    return generic_stream(nu, strategy=cfg.get("strategy", "debruijn"),
                          max_stage=_positive_int(cfg, "max_stage", DEFAULT_MAX_STAGE),
                          max_bits=args.max_bits)


def _emit_table(out: Path, name: str, columns, records, fmt, extra=None):
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, **(extra or {}), "rows": records}
        path = out / f"{name}.json"
        path.write_text(manifest_json(doc))
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)
        path = out / f"{name}.csv"
        path.write_text(buf.getvalue())
    return path


def cmd_synthesize(cfg, args, base):
    stream = _stream(cfg, args)
    stages = _positive_int(cfg, "stages", 4)
    stream.schedule.extend(stages)
    S = stream.schedule[stages].S
    n_bits = _positive_int(cfg, "N", S)
    if n_bits > args.max_bits:
        raise InputError(f"prefix of {n_bits} bits exceeds --max-bits {args.max_bits}; lower 'stages' or set 'N'")
    stream.schedule.cover(n_bits)
    prefix_path = args.out / "prefix.bin"
    write_prefix(prefix_path, stream, n_bits)
    files = {"prefix": {"file": prefix_path.name, "bits": n_bits,
                        "sha256": hashlib.sha256(prefix_path.read_bytes()).hexdigest()}}
    if cfg.get("ascii"):
        write_ascii(args.out / "prefix.txt", stream, n_bits)
        files["ascii"] = {"file": "prefix.txt"}
    sched = stream.schedule
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "measure": stream.nu.to_config(),
        "strategy": sched.strategy,
        "stages": schedule_manifest(sched),
        "lookahead_R": sched.lookahead.R0,
        "files": files,
    }
    (args.out / "manifest.json").write_text(manifest_json(manifest))
    return {"prefix": str(prefix_path), "bits": n_bits, "stages": len(sched), "S": sched.boundaries}


def _check_manifest(path: Path, stream: BitStream):
    doc = json.loads(path.read_text())
    recorded = doc.get("stages", [])
    if recorded:
        stream.schedule.extend(len(recorded))
    rebuilt = schedule_manifest(stream.schedule)[:len(recorded)]
    if rebuilt != recorded:
        raise InputError(f"{path}: stage records do not match the schedule rebuilt from the measure")


def cmd_verify(cfg, args, base):
    grid = _n_grid(cfg)
    tuples = _shift_tuples(cfg)
    stream = _stream(cfg, args)
    if "manifest" in cfg:
        _check_manifest(_resolve(base, cfg["manifest"]), stream)
    if "prefix_file" in cfg:
        word = read_prefix(_resolve(base, cfg["prefix_file"]))
        stream.schedule.cover(grid[-1] + 1)
        rows = convergence_report(stream.nu, word, tuples, grid, schedule=stream.schedule)
        source = "prefix_file"
    else:
        rows = convergence_report(stream.nu, stream, tuples, grid)
        source = "stream"
    path = _emit_table(args.out, "report", REPORT_COLUMNS, [r.as_record() for r in rows], args.format,
                       {"command": "verify", "source": source})
    return {"report": str(path), "rows": len(rows)}


def cmd_densities(cfg, args, base):
    F = _folner(cfg)
    N_max = _positive_int(cfg, "N_max")
    defect_shifts = cfg.get("defect_shifts", [1])
    if "prefix_file" in cfg:
        word = read_prefix(_resolve(base, cfg["prefix_file"]))
    else:
        if F.kind == "initial_intervals":
            need = N_max
        else:
            need = 1 + max(int(F(N)[-1]) for N in range(1, N_max + 1))
        word = _stream(cfg, args).prefix(need)
    dens = upper_density(word, F, N_max)
    records, running = [], None
    for N, d in dens:
        running = d if running is None or d > running else running
        rec = {"N": N, "density": str(d), "running_max": str(running)}
        for t in defect_shifts:
            rec[f"defect_{t}"] = str(folner_defect(F, t, N))
        records.append(rec)
    columns = ["N", "density", "running_max"] + [f"defect_{t}" for t in defect_shifts]
    path = _emit_table(args.out, "densities", columns, records, args.format,
                       {"command": "densities", "folner": F.kind})
    return {"table": str(path), "rows": len(records)}


def cmd_reclab(cfg, args, base):
    R = shift_set_from_config(cfg.get("R", "squares"))
    eps = _rational(cfg, "eps")
    r_max = _positive_int(cfg, "r_max")
    records = []
    if "measures" in cfg:
        family = [(m.get("name", f"measures[{i}]"), measure_from_config(m.get("measure"), f"measures[{i}].measure"))
                  for i, m in enumerate(cfg["measures"])]
        for rec in witness_sweep(family, R, eps, r_max):
            records.append({"experiment": "sweep", **rec})
    if "measure" in cfg:
        stream = _stream(cfg, args)
        nu = stream.nu
        records.append({"experiment": "recurrence", "witness": recurrence_witness(nu, R, r_max)})
        records.append({"experiment": "nice_recurrence", "witness": nice_recurrence_witness(nu, R, eps, r_max)})
        if "N" in cfg:
            rep = transfer_experiment(nu, R, eps, r_max, _positive_int(cfg, "N"), stream=stream)
            records.append({"experiment": "transfer", **rep.as_dict()})
        if "n_max" in cfg:
            records.append({"experiment": "r3", "values": r3_set(nu, eps, _positive_int(cfg, "n_max"))})
    if "prefix_file" in cfg:
        word = read_prefix(_resolve(base, cfg["prefix_file"]))
        N = _positive_int(cfg, "N", max(1, len(word) - r_max))
        records.append({"experiment": "nice_intersectivity", "N": N,
                        "witness": nice_intersectivity_witness(word, R, eps, r_max, N)})
    if not records:
        raise InputError("reclab needs 'measure', 'measures' or 'prefix_file'")
    for rec in records:
        rec.setdefault("bounded_search", True)
    doc = {"schema_version": SCHEMA_VERSION, "command": "reclab", "R": R.to_config(), "eps": str(eps),
           "r_max": r_max, "results": records}
    if args.format == "json":
        path = args.out / "reclab.json"
        path.write_text(manifest_json(doc))
    else:
        cols = ["experiment", "name", "N", "witness", "recurrence", "nice_recurrence",
                "measure_witness", "set_witness", "stage", "agree", "decisive", "values"]
        flat = [{c: _cell(r.get(c)) for c in cols} for r in records]
        path = _emit_table(args.out, "reclab", cols, flat, "csv")
    return {"report": str(path), "results": len(records)}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, list):
        return " ".join(map(str, v))
    return v


def cmd_decompose(cfg, args, base):
    nu = measure_from_config(cfg.get("measure"))
    comps = ergodic_decomposition(nu)
    records = [{"index": i, "weight": str(a), "kind": mu.kind, "measure": json.dumps(mu.to_config(), sort_keys=True)}
               for i, (a, mu) in enumerate(comps)]
    if args.format == "json":
        path = args.out / "decomposition.json"
        path.write_text(manifest_json({"schema_version": SCHEMA_VERSION, "command": "decompose",
                                       "components": [{"weight": str(a), "measure": mu.to_config()}
                                                      for a, mu in comps]}))
    else:
        path = _emit_table(args.out, "decomposition", ["index", "weight", "kind", "measure"], records, "csv")
    return {"components": len(comps), "weights": [str(a) for a, _ in comps], "table": str(path)}


HANDLERS = {"synthesize": cmd_synthesize, "verify": cmd_verify, "densities": cmd_densities,
            "reclab": cmd_reclab, "decompose": cmd_decompose}


def load_config(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corrset", description="Generic points, correlation sequences and recurrence experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format (default: csv)")
    p.add_argument("--max-bits", type=int, default=DEFAULT_MAX_BITS, dest="max_bits",
                   help=f"largest prefix to materialise (default: {DEFAULT_MAX_BITS})")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.max_bits < 1:
            raise InputError("--max-bits must be positive")
        cfg = load_config(args.config)
        if cfg.get("command", args.command) != args.command:
            raise InputError(f"config is for command {cfg['command']!r}, not {args.command!r}")
        args.out.mkdir(parents=True, exist_ok=True)
        summary = HANDLERS[args.command](cfg, args, args.config.parent)
    except (CorrsetError, ValueError, OSError) as exc:
        err = {"schema_version": SCHEMA_VERSION, "error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(err), file=sys.stderr)
        return 1
    print(json.dumps({"schema_version": SCHEMA_VERSION, "command": args.command, **summary}, default=str))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
