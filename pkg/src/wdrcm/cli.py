"""Experiment driver: config assembly, orchestration, CSV/JSON/SVG persistence.

Every run is fully determined by (config, master seed). Replica work may be
spread over a thread pool, but rows are buffered per task and written by a
single writer in (grid index, replica index) order, so output bytes do not
depend on --threads. The manifest is written last; its absence marks a
partial run. A manifest is itself accepted by --config for exact re-runs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import copy
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, clusters, models, multiscale, points, svgplot, theory
from .errors import FormatError, NumericError, ParameterError, WdrcmError
from .rng import derive_seed
from .sampler import (sample_edges_layered, sample_edges_naive,
                      sample_finite_graph)

_KINDS = ("sample", "sweep", "delta-eff", "classify", "diagnose", "finite-graph")

_MODEL_DEFAULTS = {
    "kernel": "min",
    "gamma": 0.5,
    "profile": "hard-polynomial",
    "delta": 2.0,
    "cap": 1.0,
    "beta": 1.0,
}

_POINT_DEFAULTS = {"kind": "poisson", "intensity": 1.0, "retention": 0.5}

_DEFAULTS = {
    "sample": {"window": 100.0, "sampler": "layered", "svg": True},
    "sweep": {"window": 1000.0, "beta_grid": [0.5, 1.0, 2.0, 4.0],
              "replicas": 10, "svg": True},
    "finite-graph": {"n_grid": [1000], "replicas": 10, "sampler": "auto",
                     "svg": True},
    "delta-eff": {"grid": [{"kernel": "min", "gamma": 0.5, "delta": 3.0}],
                  "n_points": 11, "n_max": 1.0e7, "svg": True},
    "classify": {"grid": [{"kernel": "min", "gamma": 0.5, "delta": 3.0}]},
    "diagnose": {"k_max": 8, "replicas": 200, "N": 256, "theta": 0.75,
                 "window": 1024.0},
}


def _deep_update(base, extra):
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], val)
        else:
            base[key] = val


def _set_dotted(cfg, path, raw):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    keys = path.split(".")
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ParameterError(f"cannot override through non-object '{key}'")
    node[keys[-1]] = value


def _parse_overrides(cfg, extras):
    i = 0
    while i < len(extras):
        tok = extras[i]
        if not tok.startswith("--"):
            raise ParameterError(f"unrecognized argument '{tok}'")
        body = tok[2:]
        if "=" in body:
            path, raw = body.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extras):
                raise ParameterError(f"flag '{tok}' needs a value")
            path, raw = body, extras[i + 1]
            i += 2
        _set_dotted(cfg, path, raw)


def load_config(kind, config_path, overrides, seed=None, out=None):
    cfg = {"kind": kind, "seed": 0, "out": "wdrcm-out"}
    cfg["model"] = dict(_MODEL_DEFAULTS)
    cfg["points"] = dict(_POINT_DEFAULTS)
    _deep_update(cfg, copy.deepcopy(_DEFAULTS[kind]))
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ParameterError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FormatError(f"config is not valid JSON: {exc}") from exc
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]  # manifest re-run
        _deep_update(cfg, doc)
    if overrides:
        _parse_overrides(cfg, overrides)
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out"] = out
    cfg["kind"] = kind
    return cfg


def _model_from(cfg_model):
    try:
        kernel = models.KernelSpec(cfg_model["kernel"],
                                   float(cfg_model.get("gamma", 0.5)))
        profile = models.ProfileSpec(cfg_model.get("profile", "hard-polynomial"),
                                     float(cfg_model.get("delta", 2.0)),
                                     float(cfg_model.get("cap", 1.0)))
        return models.ModelParams(kernel, profile, float(cfg_model["beta"]))
    except KeyError as exc:
        raise ParameterError(f"model config missing field {exc}") from exc


def _points_from(cfg_points):
    kind = cfg_points.get("kind", "poisson")
    return points.PointProcessSpec(kind=kind,
                                   intensity=float(cfg_points.get("intensity", 1.0)),
                                   retention=float(cfg_points.get("retention", 0.5)))


class _OutputTracker:
    """Writes files under the output dir and records sha256 digests."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.digests = {}

    def probe(self):
        try:
            os.makedirs(self.out_dir, exist_ok=True)
            probe = os.path.join(self.out_dir, ".write-probe")
            with open(probe, "w", encoding="utf-8") as fh:
                fh.write("ok")
            os.remove(probe)
        except OSError as exc:
            raise ParameterError(
                f"output directory '{self.out_dir}' is not writable: {exc}"
            ) from exc

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def _digest(self, name):
        h = hashlib.sha256()
        with open(self.path(name), "rb") as fh:
            h.update(fh.read())
        self.digests[name] = h.hexdigest()

    def write_csv(self, name, fieldnames, rows):
        with open(self.path(name), "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames,
                                    lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        self._digest(name)

    def write_json(self, name, payload):
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        self._digest(name)

    def write_text(self, name, text):
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self._digest(name)

    def note_file(self, name):
        self._digest(name)


def _write_manifest(tracker, cfg, master_seed, replica_seeds, timings,
                    failures, extra=None):
    manifest = {
        "version": __version__,
        "kind": cfg["kind"],
        "config": cfg,
        "master_seed": master_seed,
        "replica_seeds": replica_seeds,
        "timings_ms": {k: round(v * 1000.0, 3) for k, v in timings.items()},
        "failures": failures,
        "digests": dict(tracker.digests),
    }
    if extra:
        manifest.update(extra)
    with open(tracker.path("manifest.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _run_tasks(tasks, worker, threads):
    """Execute worker over tasks, preserving task order in the results."""
    if threads <= 1:
        return [worker(task) for task in tasks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, tasks))


def _replica_rows(cfg, grid, sample_one, threads):
    """(grid x replica) fan-out; returns (rows, seeds, failures)."""
    master = int(cfg["seed"])
    replicas = int(cfg.get("replicas", 1))
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    tasks = [(gi, ri) for gi in range(len(grid)) for ri in range(replicas)]
    seeds = [{"grid_index": gi, "replica_index": ri,
              "seed": derive_seed(master, gi, ri)} for gi, ri in tasks]

    def worker(task):
        gi, ri = task
        seed_r = derive_seed(master, gi, ri)
        try:
            return sample_one(gi, grid[gi], seed_r)
        except Exception as exc:  # per-replica failure; run continues
            return ("error", gi, ri, f"{type(exc).__name__}: {exc}")

    results = _run_tasks(tasks, worker, threads)
    rows, failures = [], []
    for task, res in zip(tasks, results):
        if isinstance(res, tuple) and res and res[0] == "error":
            failures.append({"grid_index": res[1], "replica_index": res[2],
                             "error": res[3]})
        else:
            rows.append(res)
    return rows, seeds, failures


def _degree_hist_rows(g):
    deg = clusters.degrees(g)
    values, counts = np.unique(deg, return_counts=True)
    return [{"degree": int(v), "count": int(c)}
            for v, c in zip(values, counts)]


def _maybe_svg(tracker, cfg, csv_name, kind, svg_name):
    if not cfg.get("svg", False):
        return
    try:
        svgplot.emit_plot(tracker.path(csv_name), kind,
                          tracker.path(svg_name))
    except FormatError:
        return  # degenerate data; CSV remains authoritative
    tracker.note_file(svg_name)


def _cmd_sample(cfg, threads):
    tracker = _OutputTracker(cfg["out"])
    tracker.probe()
    t0 = time.perf_counter()
    m = _model_from(cfg["model"])
    pp = _points_from(cfg["points"])
    window = float(cfg["window"])
    seed_r = derive_seed(int(cfg["seed"]), 0, 0)
    config = points.sample_configuration(pp, window, seed_r)
    sampler_name = cfg.get("sampler", "layered")
    if sampler_name == "naive":
        g = sample_edges_naive(config, m, seed_r)
    elif sampler_name == "layered":
        g = sample_edges_layered(config, m, seed_r)
    else:
        raise ParameterError(f"unknown sampler '{sampler_name}'")
    t_sample = time.perf_counter()
    rep = clusters.components(g)
    tracker.write_text("sample.json", g.to_json() + "\n")
    tracker.write_csv("sample.csv", clusters.csv_fields(),
                      [clusters.report_row(g, rep, window)])
    tracker.write_csv("degree_hist.csv", ("degree", "count"),
                      _degree_hist_rows(g))
    _maybe_svg(tracker, cfg, "degree_hist.csv", "degree-tail",
               "degree_tail.svg")
    timings = {"sampling": t_sample - t0, "total": time.perf_counter() - t0}
    seeds = [{"grid_index": 0, "replica_index": 0, "seed": seed_r}]
    _write_manifest(tracker, cfg, int(cfg["seed"]), seeds, timings, [])
    return 0


def _beta_hat(betas, fractions):
    for i, frac in enumerate(fractions):
        if frac > 0.5:
            if i == 0:
                return float(betas[0])
            b0, b1 = betas[i - 1], betas[i]
            f0, f1 = fractions[i - 1], fractions[i]
            if f1 == f0:
                return float(b1)
            return float(b0 + (0.5 - f0) * (b1 - b0) / (f1 - f0))
    return None


def _cmd_sweep(cfg, threads):
    tracker = _OutputTracker(cfg["out"])
    tracker.probe()
    t0 = time.perf_counter()
    pp = _points_from(cfg["points"])
    window = float(cfg["window"])
    betas = [float(b) for b in cfg["beta_grid"]]
    if not betas:
        raise ParameterError("beta_grid must be nonempty")
    base_model = dict(cfg["model"])

    def sample_one(gi, beta, seed_r):
        model_cfg = dict(base_model)
        model_cfg["beta"] = beta
        m = _model_from(model_cfg)
        config = points.sample_configuration(pp, window, seed_r)
        g = sample_edges_layered(config, m, seed_r)
        rep = clusters.components(g)
        return clusters.report_row(g, rep, window)

    rows, seeds, failures = _replica_rows(cfg, betas, sample_one, threads)
    t_sample = time.perf_counter()
    tracker.write_csv("sweep.csv", clusters.csv_fields(), rows)
    means = []
    for beta in betas:
        key = repr(float(beta))
        fr = [float(r["largest_fraction"]) for r in rows if r["beta"] == key]
        means.append(sum(fr) / len(fr) if fr else float("nan"))
    bhat = _beta_hat(betas, means)
    tracker.write_json("beta_hat.json", {
        "beta_grid": betas,
        "mean_largest_fraction": means,
        "beta_hat": bhat,
    })
    _maybe_svg(tracker, cfg, "sweep.csv", "sweep", "sweep.svg")
    timings = {"sampling": t_sample - t0, "total": time.perf_counter() - t0}
    _write_manifest(tracker, cfg, int(cfg["seed"]), seeds, timings, failures)
    return 0


def _cmd_finite(cfg, threads):
    tracker = _OutputTracker(cfg["out"])
    tracker.probe()
    t0 = time.perf_counter()
    m = _model_from(cfg["model"])
    sizes = [int(n) for n in cfg["n_grid"]]
    if not sizes:
        raise ParameterError("n_grid must be nonempty")
    sampler_name = cfg.get("sampler", "auto")

    def sample_one(gi, n, seed_r):
        g = sample_finite_graph(n, m, seed_r, sampler=sampler_name)
        rep = clusters.components(g)
        return clusters.report_row(g, rep, float(n))

    rows, seeds, failures = _replica_rows(cfg, sizes, sample_one, threads)
    t_sample = time.perf_counter()
    tracker.write_csv("finite.csv", clusters.csv_fields(), rows)
    summary = []
    for n in sizes:
        key = repr(float(n))
        fr = np.asarray([float(r["largest_fraction"]) for r in rows
                         if r["L_or_n"] == key])
        if fr.size == 0:
            continue
        se = (float(np.std(fr, ddof=1) / np.sqrt(fr.size))
              if fr.size > 1 else 0.0)
        mean = float(np.mean(fr))
        summary.append({
            "n": n,
            "replicas": int(fr.size),
            "mean_fraction": repr(mean),
            "se": repr(se),
            "ci_low": repr(float(mean - 1.959963984540054 * se)),
            "ci_high": repr(float(mean + 1.959963984540054 * se)),
            "median_fraction": repr(float(np.median(fr))),
        })
    tracker.write_csv("finite_summary.csv",
                      ("n", "replicas", "mean_fraction", "se", "ci_low",
                       "ci_high", "median_fraction"), summary)
    _maybe_svg(tracker, cfg, "finite.csv", "finite-graph", "finite.svg")
    timings = {"sampling": t_sample - t0, "total": time.perf_counter() - t0}
    _write_manifest(tracker, cfg, int(cfg["seed"]), seeds, timings, failures)
    return 0


def _grid_specs(cfg):
    grid = cfg.get("grid")
    if not grid:
        raise ParameterError("grid must be a nonempty list of kernel points")
    out = []
    for entry in grid:
        kernel = models.KernelSpec(entry["kernel"],
                                   float(entry.get("gamma", 0.5)))
        out.append((kernel, float(entry["delta"])))
    return out


def _cmd_delta_eff(cfg, threads):
    tracker = _OutputTracker(cfg["out"])
    tracker.probe()
    t0 = time.perf_counter()
    specs = _grid_specs(cfg)
    if "n_grid" in cfg:
        n_grid = np.asarray([int(n) for n in cfg["n_grid"]], dtype=np.int64)
    else:
        n_grid = np.unique(np.geomspace(
            100.0, float(cfg["n_max"]), int(cfg["n_points"])).astype(np.int64))
    curve_rows, summary_rows, failures = [], [], []
    last_error = None
    for gi, (kernel, delta) in enumerate(specs):
        profile = models.ProfileSpec("hard-polynomial", delta)
        try:
            report = theory.delta_eff_estimate(kernel, profile, n_grid)
        except WdrcmError as exc:
            failures.append({"grid_index": gi, "replica_index": 0,
                             "error": f"{type(exc).__name__}: {exc}"})
            last_error = exc
            continue
        for n, val in zip(report.n_grid, report.I_values):
            curve_rows.append({
                "kernel": kernel.variant, "gamma": repr(kernel.gamma),
                "delta": repr(delta), "n": int(n), "I_value": repr(float(val)),
            })
        summary_rows.append({
            "kernel": kernel.variant, "gamma": repr(kernel.gamma),
            "delta": repr(delta),
            "fitted_slope": repr(report.fitted_slope),
            "delta_eff": repr(report.delta_eff),
            "closed_form": "" if report.closed_form is None
            else repr(report.closed_form),
            "residual": repr(report.residual),
        })
    if not summary_rows and last_error is not None:
        raise last_error
    tracker.write_csv("delta_eff_curve.csv",
                      ("kernel", "gamma", "delta", "n", "I_value"), curve_rows)
    tracker.write_csv("delta_eff.csv",
                      ("kernel", "gamma", "delta", "fitted_slope", "delta_eff",
                       "closed_form", "residual"), summary_rows)
    _maybe_svg(tracker, cfg, "delta_eff_curve.csv", "delta-eff",
               "delta_eff.svg")
    timings = {"total": time.perf_counter() - t0}
    _write_manifest(tracker, cfg, int(cfg["seed"]), [], timings, failures)
    return 0


def _cmd_classify(cfg, threads):
    tracker = _OutputTracker(cfg["out"])
    tracker.probe()
    t0 = time.perf_counter()
    rows = []
    for kernel, delta in _grid_specs(cfg):
        label = theory.classify_regime(kernel, delta, kernel.gamma)
        closed = theory.delta_eff_closed_form(kernel, delta, kernel.gamma)
        rows.append({
            "kernel": kernel.variant, "gamma": repr(kernel.gamma),
            "delta": repr(delta), "label": label.label,
            "provenance": label.provenance,
            "delta_eff": "" if closed is None else repr(closed),
        })
    tracker.write_csv("classify.csv",
                      ("kernel", "gamma", "delta", "label", "provenance",
                       "delta_eff"), rows)
    timings = {"total": time.perf_counter() - t0}
    _write_manifest(tracker, cfg, int(cfg["seed"]), [], timings, [])
    return 0


def _cmd_diagnose(cfg, threads):
    tracker = _OutputTracker(cfg["out"])
    tracker.probe()
    t0 = time.perf_counter()
    m = _model_from(cfg["model"])
    pp = _points_from(cfg["points"])
    master = int(cfg["seed"])
    replicas = int(cfg["replicas"])
    k_max = int(cfg["k_max"])
    crossing = multiscale.crossing_sweep(m, pp, k_max, replicas,
                                         derive_seed(master, 0))
    rows = [{"stage": k, "chi_freq": repr(f), "ci_low": repr(lo),
             "ci_high": repr(hi)}
            for k, f, lo, hi in zip(crossing.k_values, crossing.chi_freq,
                                    crossing.ci_low, crossing.ci_high)]
    tracker.write_csv("diagnose_crossing.csv",
                      ("stage", "chi_freq", "ci_low", "ci_high"), rows)

    N = int(cfg["N"])
    theta = float(cfg["theta"])
    window = float(cfg["window"])
    seed_b = derive_seed(master, 1)
    config = points.sample_configuration(pp, window, seed_b)
    g = sample_edges_layered(config, m, seed_b)
    goodness = multiscale.block_goodness(g, N, theta)
    block_rows = [{"scale": N, "block_index": row.i, "largest": row.largest,
                   "is_good": "1" if row.is_good else "0"}
                  for row in goodness.rows]
    tracker.write_csv("diagnose_blocks.csv",
                      ("scale", "block_index", "largest", "is_good"),
                      block_rows)
    sweep = multiscale.block_goodness_sweep(m, pp, N, theta, replicas,
                                            derive_seed(master, 2))
    timings = {"total": time.perf_counter() - t0}
    seeds = [{"grid_index": i, "replica_index": 0,
              "seed": derive_seed(master, i)} for i in range(3)]
    _write_manifest(tracker, cfg, master, seeds, timings, [], extra={
        "no_crossing_freq": crossing.no_crossing_freq,
        "block_bad_fraction": goodness.bad_fraction,
        "block_p_bad": sweep.empirical_p_bad,
        "block_p_bad_ci": list(sweep.p_bad_ci),
    })
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "sweep": _cmd_sweep,
    "delta-eff": _cmd_delta_eff,
    "classify": _cmd_classify,
    "diagnose": _cmd_diagnose,
    "finite-graph": _cmd_finite,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wdrcm",
        description="Spatial random graph experiments: sampling, cluster "
                    "observables, effective decay estimation, diagnostics.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in _KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", default=None,
                       help="JSON config (a manifest.json also works)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None):
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        cfg = load_config(args.kind, args.config, extras,
                          seed=args.seed, out=args.out)
        threads = max(1, int(args.threads))
        return _COMMANDS[args.kind](cfg, threads)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, FormatError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
