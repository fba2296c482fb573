"""Command line entry point: ``wavekin {run,sweep,converge,oracle}``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from . import collision
from ._jit import set_threads, threads_from_env
from .config import RunManifest, load_config, parse_config
from .consistency import consistency_study
from .errors import WavekinError
from .mesh import build_uniform_grid
from .output import write_csv, write_run
from .simulation import SimConfig, run

__all__ = ["main", "cmd_run", "cmd_sweep", "cmd_converge", "cmd_oracle", "run_oracle"]


def _log(msg):
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------- commands


def cmd_run(manifest: RunManifest, out_dir: str) -> int:
    result = run(manifest.config)
    paths = write_run(result, out_dir)
    s = result.series
    _log(f"run: {len(s.times) - 1} steps, E(T)/E(0) = {s.energy[-1] / s.energy[0]:.6g}"
         if s.energy[0] else f"run: {len(s.times) - 1} steps")
    if s.negativity_events.sum():
        _log(f"run: {int(s.negativity_events.sum())} negative components recorded")
    _log("wrote " + ", ".join(os.path.basename(p) for p in paths))
    return 0


def _sweep_member(slug: str, cfg: SimConfig, out_dir: str):
    result = run(cfg)
    write_run(result, os.path.join(out_dir, slug))
    s = result.series
    return (float(s.energy[0]), float(s.energy[-1]), float(s.m3[0]), float(s.m3[-1]),
            bool(np.all(s.energy == s.energy[0])))


def cmd_sweep(manifest: RunManifest, out_dir: str, workers: int = 1) -> int:
    """One sub-directory per tuple plus ``summary.csv``; failed tuples are reported."""
    if manifest.sweep is None:
        raise WavekinError("sweep command needs 'sweep = c1c2' or 'sweep = sigma_gamma'")
    members = manifest.tuples()
    os.makedirs(out_dir, exist_ok=True)
    outcomes = {}
    if workers > 1 and len(members) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {slug: pool.submit(_sweep_member, slug, cfg, out_dir) for slug, cfg in members}
            for slug, fut in futs.items():
                try:
                    outcomes[slug] = fut.result()
                except Exception as exc:  # reported per tuple below
                    outcomes[slug] = exc
    else:
        for slug, cfg in members:
            try:
                outcomes[slug] = _sweep_member(slug, cfg, out_dir)
            except Exception as exc:
                outcomes[slug] = exc

    k1, k2 = manifest.sweep_keys
    rows, failed = [], []
    for (slug, cfg), (a, b) in zip(members, manifest.sweep_values):
        res = outcomes[slug]
        if isinstance(res, Exception):
            failed.append(slug)
            rows.append((slug, a, b, float("nan"), float("nan"), float("nan"), float("nan"),
                         "", f"failed: {res}"))
        else:
            rows.append((slug, a, b, *res, "ok"))
    write_csv(os.path.join(out_dir, "summary.csv"),
              ["tuple", k1, k2, "energy_0", "energy_T", "m3_0", "m3_T", "energy_constant",
               "status"], rows)
    _log(f"sweep: {len(members) - len(failed)}/{len(members)} tuples completed")
    if failed:
        _log("sweep: failed tuples: " + ", ".join(failed))
        return 1
    return 0


def cmd_converge(manifest: RunManifest, out_dir: str) -> int:
    cfg = manifest.config
    if len(manifest.levels) < 2:
        raise WavekinError("converge needs at least two levels")
    rows = consistency_study(manifest.levels, cfg.initial_density(), cfg.params, cfg.disp,
                             cfg.omega_min, cfg.omega_max)
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "converge.csv"), ["delta_omega", "eps_l1", "observed_order"],
              [(r.delta_omega, r.eps_l1, r.observed_order) for r in rows])
    for r in rows:
        _log(f"converge: I = {r.cells:4d}  dw = {r.delta_omega:.4g}  "
             f"eps = {r.eps_l1:.6g}  order = {r.observed_order:.4g}")
    return 0


def run_oracle(manifest: RunManifest, rhs_fn: Optional[Callable] = None,
               zero_state: bool = False) -> tuple[float, list]:
    """Compare ``rhs_fn`` (default :func:`collision.rhs`) with the brute-force oracle.

    Each trial draws a cell count in ``[2, max_cells]`` and a non-negative
    state from ``numpy.random.default_rng(seed)``.  Returns the largest
    relative componentwise deviation and per-trial rows.
    """
    if manifest.max_cells > 20:
        raise WavekinError("max_cells must be <= 20 for the oracle")
    rhs_fn = rhs_fn or collision.rhs
    cfg = manifest.config
    rng = np.random.default_rng(manifest.seed)
    worst, rows = 0.0, []
    contexts = {}
    for t in range(manifest.trials):
        cells = int(rng.integers(2, manifest.max_cells + 1))
        if cells not in contexts:
            g = build_uniform_grid(cfg.omega_min, cfg.omega_max, cells)
            contexts[cells] = collision.OperatorContext(g, cfg.params, cfg.disp)
        ctx = contexts[cells]
        n = np.zeros(cells) if zero_state else rng.random(cells)
        fast = np.asarray(rhs_fn(n, ctx))
        ref = collision.brute_force_rhs(n, ctx)
        with np.errstate(divide="ignore", invalid="ignore"):
            dev = np.abs(fast - ref) / np.abs(ref)
        dev = np.where(fast == ref, 0.0, dev)
        d = float(np.max(dev)) if dev.size else 0.0
        worst = max(worst, d)
        rows.append((t, cells, d))
    return worst, rows


def cmd_oracle(manifest: RunManifest, out_dir: Optional[str] = None) -> int:
    worst, rows = run_oracle(manifest)
    ok = worst < 1e-12
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        write_csv(os.path.join(out_dir, "oracle.csv"), ["trial", "cells", "max_rel_dev"], rows)
    print(f"oracle: {'PASS' if ok else 'FAIL'} trials={manifest.trials} "
          f"max_cells={manifest.max_cells} max_rel_dev={worst:.3e}")
    return 0 if ok else 1


# --------------------------------------------------------------------------- argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output directory (default: out or the config's 'out')")
    common.add_argument("--seed", type=int, help="PRNG seed (overrides the config)")
    common.add_argument("--threads", type=int,
                        help="worker threads/processes (default: $WAVEKIN_THREADS or 1)")
    common.add_argument("--deterministic", action="store_true",
                        help="force ascending-order sequential summation")
    p = argparse.ArgumentParser(prog="wavekin", description="Finite volume solver for the "
                                "isotropic mixed 3-/4-wave kinetic equation.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single simulation")
    sub.add_parser("sweep", parents=[common], help="parameter sweep over (c1,c2) or (sigma,gamma)")
    sub.add_parser("converge", parents=[common], help="consistency-order study")
    sub.add_parser("oracle", parents=[common], help="check rhs against the brute-force oracle")
    return p


def _resolve(args) -> tuple[RunManifest, str, int]:
    manifest = load_config(args.config) if args.config else parse_config("")
    threads = args.threads if args.threads is not None else threads_from_env(
        manifest.config.threads or 1)
    if threads < 1:
        raise WavekinError("--threads must be >= 1")
    cfg = manifest.config
    cfg = replace(cfg, threads=threads,
                  deterministic=True if args.deterministic else cfg.deterministic)
    manifest = replace(manifest, config=cfg)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise WavekinError("--seed must be an unsigned 64-bit integer")
        manifest = replace(manifest, seed=args.seed)
    out_dir = args.out or manifest.out_dir or "out"
    return manifest, out_dir, threads


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest, out_dir, threads = _resolve(args)
        set_threads(threads)
        if args.command == "run":
            return cmd_run(manifest, out_dir)
        if args.command == "sweep":
            return cmd_sweep(manifest, out_dir, workers=threads)
        if args.command == "converge":
            return cmd_converge(manifest, out_dir)
        return cmd_oracle(manifest, out_dir)
    except (WavekinError, OSError) as exc:
        _log(f"wavekin {args.command}: error: {exc}")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
