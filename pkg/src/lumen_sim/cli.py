"""``lumen-sim`` command line: train, eval, power, lower and sweep.

Exit status: 0 success, 2 configuration error, 3 input-data error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import config as config_mod
from .config import ConfigError, RunConfig
from .engine import IDEAL, NumericError, PhotonicModel, evaluate, train
from .idx import IdxError, load_idx
from .lowering import describe, lower
from .power import power_csv, power_sweep
from .weights import WeightFileError, load_weights, save_weights

log = logging.getLogger("lumen_sim")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

ACCURACY_COLUMNS = [
    "network", "backend", "noise_enabled", "delta_f", "noise_scale", "p_fullscale",
    "seed", "n_samples", "n_correct", "accuracy", "n_clipped",
]
SWEEP_COLUMNS = [
    "row_type", "backend", "param", "value", "seed", "n_samples", "accuracy", "accuracy_std", "n_clipped",
]


class DataError(RuntimeError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _write(out_dir, name, text) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="") as f:
        f.write(text)
    log.info("wrote %s", path)
    return path


def _require(cfg: RunConfig, *keys):
    """Resolve data paths named by ``keys`` and check that they exist."""
    paths = []
    for key in keys:
        section, _, name = key.partition(".")
        raw = cfg.doc[section][name] if name else cfg.doc[section]
        if raw is None:
            raise ConfigError(f"$.{key}", "required for this command")
        p = cfg.path(raw)
        if not os.path.exists(p):
            raise DataError(f"$.{key}: file not found: {p}")
        paths.append(p)
    return paths


def _dataset(cfg: RunConfig, split: str):
    images, labels = _require(cfg, f"data.{split}_images", f"data.{split}_labels")
    return load_idx(images, labels).subset(cfg.doc["data"]["limit"])


def _weights(cfg: RunConfig):
    (path,) = _require(cfg, "weights")
    return load_weights(path).check(cfg.network)


def _program(cfg: RunConfig, w, backend):
    if backend == IDEAL:
        return None
    return PhotonicModel.program(cfg.network, w, backend, cfg.devices, cfg.encoding, cfg.calibrate_with)


def _accuracy_row(cfg: RunConfig, report) -> dict:
    n = report.noise
    return {
        "network": cfg.network.name, "backend": report.backend, "noise_enabled": n.enabled,
        "delta_f": float(n.delta_f), "noise_scale": float(n.noise_scale),
        "p_fullscale": cfg.encoding.p_fullscale, "seed": report.seed, "n_samples": report.n_samples,
        "n_correct": report.n_correct, "accuracy": report.accuracy, "n_clipped": report.n_clipped,
    }


# -- commands -------------------------------------------------------------------

def cmd_train(cfg: RunConfig, out_dir: str) -> list[str]:
    data = _dataset(cfg, "train")
    w = train(cfg.network, data.as_tuple(), cfg.train, cfg.devices.eom)
    return [save_weights(w, os.path.join(out_dir, "weights.json"), cfg.network)]


def cmd_eval(cfg: RunConfig, out_dir: str) -> list[str]:
    data = _dataset(cfg, "test")
    w = _weights(cfg)
    backend = cfg.doc["backend"]
    report = evaluate(cfg.network, w, data.as_tuple(), backend, cfg.encoding, cfg.noise, cfg.doc["seed"],
                      cfg.devices, cfg.doc["workers"], _program(cfg, w, backend))
    return [_write(out_dir, "accuracy.csv", _csv(ACCURACY_COLUMNS, [_accuracy_row(cfg, report)]))]


def cmd_power(cfg: RunConfig, out_dir: str) -> list[str]:
    reports = power_sweep(cfg.networks, [b for b in cfg.doc["backends"] if b != IDEAL], cfg.power)
    return [_write(out_dir, "power.csv", power_csv(reports))]


def cmd_lower(cfg: RunConfig, out_dir: str) -> list[str]:
    backend = cfg.doc["backend"]
    if backend == IDEAL:
        raise ConfigError("$.backend", "lowering needs a device backend (mrr or mzi)")
    graph = lower(cfg.network, backend)
    census = {"network": cfg.network.name, "backend": backend,
              "census": graph.to_netlist()["census"], "layers": describe(cfg.network, backend)}
    return [
        _write(out_dir, "netlist.json", graph.dumps() + "\n"),
        _write(out_dir, "census.json", json.dumps(census, indent=2, sort_keys=True) + "\n"),
    ]


def sweep_rows(cfg: RunConfig, w, data) -> list[dict]:
    """Accuracy for every backend x value x seed cell plus per-(backend, value) summaries."""
    sw = cfg.doc["sweep"]
    param = sw["param"]
    cells = [(b, v, s) for b in cfg.doc["backends"] for v in sw["values"] for s in sw["seeds"]]
    models = {}

    def model_for(b, v, cell_cfg):
        # device phases depend on device/encoding settings only, not on noise
        key = (b, v) if not param.startswith("noise.") else (b,)
        if key not in models:
            models[key] = _program(cell_cfg, w, b)
        return models[key]

    prepared = []
    for b, v, s in cells:
        cell_cfg = cfg.with_override(param, v)
        prepared.append((b, v, s, cell_cfg, model_for(b, v, cell_cfg)))

    def run(item):
        b, v, s, cell_cfg, model = item
        r = evaluate(cell_cfg.network, w, data, b, cell_cfg.encoding, cell_cfg.noise, s, cell_cfg.devices,
                     1, model)
        return {"row_type": "run", "backend": b, "param": param, "value": float(v), "seed": s,
                "n_samples": r.n_samples, "accuracy": r.accuracy, "n_clipped": r.n_clipped}

    workers = cfg.doc["workers"]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(run, prepared))
    else:
        rows = [run(p) for p in prepared]
    rows.sort(key=lambda r: (r["backend"], r["value"], r["seed"]))

    summary = []
    for b in sorted(set(cfg.doc["backends"])):
        for v in sorted(set(float(x) for x in sw["values"])):
            acc = np.array([r["accuracy"] for r in rows if r["backend"] == b and r["value"] == v])
            n_clipped = max(r["n_clipped"] for r in rows if r["backend"] == b and r["value"] == v)
            summary.append({"row_type": "summary", "backend": b, "param": param, "value": v, "seed": None,
                            "n_samples": rows[0]["n_samples"], "accuracy": float(acc.mean()),
                            "accuracy_std": float(acc.std()), "n_clipped": n_clipped})
    return rows + summary


def cmd_sweep(cfg: RunConfig, out_dir: str) -> list[str]:
    data = _dataset(cfg, "test").as_tuple()
    w = _weights(cfg)
    return [_write(out_dir, "sweep.csv", _csv(SWEEP_COLUMNS, sweep_rows(cfg, w, data)))]


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "power": cmd_power, "lower": cmd_lower, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lumen-sim", description="Photonic neural network inference simulator")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field by dotted path (value parsed as JSON if possible)")
    p.add_argument("--out", help="output directory (default: config output_dir)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_mod.load(args.config, config_mod.parse_overrides(args.set))
        out_dir = args.out or cfg.path(cfg.doc["output_dir"])
        for path in COMMANDS[args.command](cfg, out_dir):
            print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, IdxError, WeightFileError, FileNotFoundError) as exc:
        print(f"input data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # shape mismatches between config network and weight file, etc.
        print(f"input data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
