"""Command-line entry point.

Subcommands map one-to-one onto the library workflows:

    codes          catalog listing, constructed-parameter comparison, matrix export
    simulate       Monte-Carlo crash-rate estimate for one configuration
    estimate       closed-form model breakdown (JSON + one-line CSV)
    threshold      multi-level concatenation threshold for a k=1 code
    surface        computation-size surface over codes and provisioning
    ancilla-stats  preparation census and power-law fits

All tabular output is CSV without timestamps so reruns with the same seed
and configuration are byte-identical.  Exit codes: 0 success, 2 bad
configuration, 3 a numerical flag was raised (censored Monte Carlo or a
below-break-even concatenation).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

from . import analytic, codes as codes_mod, concat as concat_mod
from . import simulator, stats as stats_mod, sweep as sweep_mod
from .noise import NoiseParams
from .simulator import ProtocolParams, SimConfig, ProtocolError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FLAGGED = 3


@dataclasses.dataclass
class RunConfig:
    """Fully serializable run description; reruns reproduce identical bytes."""
    subcommand: str
    code: str = "hamming"
    gamma: float = 1e-4
    eps: float = 1e-6
    t_m: int = 1
    n_rep: float = 1.0
    parallel_corrections: Optional[float] = None
    r: int = 2
    r_prime: int = 2
    r_dprime: int = 2
    eps_over_gamma: float = 0.01
    trials: int = 0
    target_failures: int = 100
    seed: int = 0
    workers: int = 1
    out_dir: str = "."
    rel_width: float = 1e-2
    gammas: Optional[list[float]] = None
    optimize: bool = False
    curves: bool = False

    def noise(self) -> NoiseParams:
        return NoiseParams.uniform(self.gamma, self.eps, self.t_m)

    def protocol(self) -> ProtocolParams:
        return ProtocolParams(self.r, self.r_prime, self.r_dprime,
                              n_rep=self.n_rep,
                              parallel_corrections=self.parallel_corrections)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "RunConfig":
        return RunConfig(**json.loads(text))


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("")
        return
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftqec",
                                description="fault-tolerant QEC laboratory")
    p.add_argument("--config", help="JSON RunConfig; flags override its fields")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--out-dir", default=None)

    sp = sub.add_parser("codes", help="catalog and constructed parameters")
    common(sp)
    sp.add_argument("--code", default=None, help="export this code's check matrix")

    sp = sub.add_parser("simulate", help="Monte-Carlo crash rate")
    common(sp)
    sp.add_argument("--code", default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--tm", type=int, default=None)
    sp.add_argument("--nrep", type=float, default=None)
    sp.add_argument("--parallel-corrections", type=float, default=None)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--rp", type=int, default=None)
    sp.add_argument("--rpp", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None,
                    help="trial cap (0 = run to the failure target)")
    sp.add_argument("--target-failures", type=int, default=None)

    sp = sub.add_parser("estimate", help="closed-form model breakdown")
    common(sp)
    sp.add_argument("--code", default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--tm", type=int, default=None)
    sp.add_argument("--nrep", type=float, default=None)
    sp.add_argument("--parallel-corrections", type=float, default=None)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--rp", type=int, default=None)
    sp.add_argument("--rpp", type=int, default=None)
    sp.add_argument("--optimize", action="store_true",
                    help="grid-minimize pbar over (r, r', r'')")
    sp.add_argument("--curves", action="store_true",
                    help="also emit the model-vs-simulation comparison grid")

    sp = sub.add_parser("threshold", help="multi-level noise threshold")
    common(sp)
    sp.add_argument("--code", default=None)
    sp.add_argument("--eps-over-gamma", type=float, default=None)
    sp.add_argument("--tm", type=int, default=None)
    sp.add_argument("--rel-width", type=float, default=None)

    sp = sub.add_parser("surface", help="KQ surface")
    common(sp)
    sp.add_argument("--gammas", type=float, nargs="+", default=None)
    sp.add_argument("--eps-over-gamma", type=float, default=None)
    sp.add_argument("--tm", type=int, default=None)

    sp = sub.add_parser("ancilla-stats", help="preparation census")
    common(sp)
    sp.add_argument("--code", default=None)
    sp.add_argument("--gammas", type=float, nargs="+", default=None)
    sp.add_argument("--eps-over-gamma", type=float, default=None)
    sp.add_argument("--tm", type=int, default=None)
    sp.add_argument("--trials", type=int, default=None)
    return p


def _merge_config(ns: argparse.Namespace) -> RunConfig:
    if ns.config:
        cfg = RunConfig.from_json(Path(ns.config).read_text())
        cfg.subcommand = ns.subcommand
    else:
        cfg = RunConfig(subcommand=ns.subcommand)
    field_map = {
        "code": "code", "gamma": "gamma", "eps": "eps", "tm": "t_m",
        "nrep": "n_rep", "parallel_corrections": "parallel_corrections",
        "r": "r", "rp": "r_prime", "rpp": "r_dprime",
        "eps_over_gamma": "eps_over_gamma", "trials": "trials",
        "target_failures": "target_failures", "seed": "seed",
        "workers": "workers", "out_dir": "out_dir", "rel_width": "rel_width",
        "gammas": "gammas", "optimize": "optimize", "curves": "curves",
    }
    for arg, field_name in field_map.items():
        if hasattr(ns, arg):
            val = getattr(ns, arg)
            if val is not None and val is not False:
                setattr(cfg, field_name, val)
    return cfg


def _cmd_codes(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    rows = []
    for row in codes_mod.catalog():
        if row["name"] == "none":
            continue
        cmp_row = codes_mod.compare_with_catalog(row["name"])
        rows.append(cmp_row)
    _write_csv(out / "codes.csv", rows)
    mismatches = sum(1 for r in rows if r["mismatch"])
    if cfg.code:
        code = codes_mod.construct_code(cfg.code)
        (out / f"{cfg.code}_check_matrix.txt").write_text(
            code.check_matrix_text() + "\n")
    print(f"codes: {len(rows)} constructions checked, "
          f"{mismatches} differ from the catalog (reported side by side)")
    return EXIT_OK


def _cmd_simulate(cfg: RunConfig) -> int:
    sim_cfg = SimConfig(cfg.code, cfg.noise(), cfg.protocol(),
                        target_failures=cfg.target_failures,
                        max_trials=cfg.trials if cfg.trials else 4_000_000)
    stats = simulator.estimate_pbar_mc(sim_cfg, seed=cfg.seed,
                                       workers=cfg.workers)
    rows = simulator.stats_csv_rows(sim_cfg, stats)
    _write_csv(Path(cfg.out_dir) / "simulate.csv", rows)
    print(f"simulate: code={cfg.code} gamma={cfg.gamma:g} pbar={stats.pbar:.4g} "
          f"stderr={stats.stderr:.2g} trials={stats.trials}"
          f"{' CENSORED' if stats.censored else ''}")
    return EXIT_FLAGGED if stats.censored else EXIT_OK


def _cmd_estimate(cfg: RunConfig) -> int:
    code = codes_mod.params_from_catalog(cfg.code)
    noise = cfg.noise()
    if cfg.optimize:
        pp, _ = analytic.optimize_protocol(
            code, noise, n_rep=cfg.n_rep,
            parallel_corrections=cfg.parallel_corrections)
    else:
        pp = cfg.protocol()
    est = analytic.crash_estimate(code, noise, pp)
    payload = est.as_dict()
    payload.update({"code": cfg.code, "gamma": cfg.gamma, "eps": cfg.eps,
                    "t_m": cfg.t_m, "n_rep": cfg.n_rep,
                    "r": pp.r, "r_prime": pp.r_prime, "r_dprime": pp.r_dprime,
                    "N_GV": code.N_GV, "N_h": code.N_h})
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "estimate.json").write_text(json.dumps(payload, indent=2,
                                                  sort_keys=True) + "\n")
    _write_csv(out / "estimate.csv", [payload])
    if cfg.curves:
        _write_csv(out / "model_curves.csv", analytic.model_curves())
    print(f"estimate: code={cfg.code} gamma={cfg.gamma:g} pbar={est.pbar:.4g} "
          f"alpha={est.alpha:.4f} beta={est.beta:.4f}")
    if not est.usable:
        print("estimate: code unusable at this noise (alpha <= 0)")
        return EXIT_FLAGGED
    return EXIT_OK


def _cmd_threshold(cfg: RunConfig) -> int:
    code = codes_mod.params_from_catalog(cfg.code)
    gamma0 = concat_mod.threshold(code, cfg.eps_over_gamma, cfg.t_m,
                                  rel_width=cfg.rel_width)
    trace = concat_mod.level_trace(code, gamma0 * 0.5, cfg.eps_over_gamma,
                                   cfg.t_m)
    rows = [{"level": i + 1, "gamma": gamma0 * 0.5, "pbar": p}
            for i, p in enumerate(trace)]
    _write_csv(Path(cfg.out_dir) / "threshold_trace.csv", rows)
    print(f"threshold: code={cfg.code} eps/gamma={cfg.eps_over_gamma:g} "
          f"tm={cfg.t_m} gamma0={gamma0:.4g}")
    return EXIT_OK


def _cmd_surface(cfg: RunConfig) -> int:
    gammas = tuple(cfg.gammas or (1e-4, 1e-3))
    sweep_cfg = sweep_mod.SweepConfig(gammas=gammas,
                                      eps_over_gamma=cfg.eps_over_gamma,
                                      t_m=cfg.t_m)
    surface = sweep_mod.build_surface(sweep_cfg)
    out = Path(cfg.out_dir)
    _write_csv(out / "surface.csv", surface.rows())
    (out / "surface.plt").write_text(
        sweep_mod.surface_plot_script("surface.csv"))
    print(f"surface: {len(surface.cells)} populated cells over "
          f"{len(gammas)} noise levels")
    return EXIT_OK


def _cmd_ancilla_stats(cfg: RunConfig) -> int:
    gammas = cfg.gammas or [1e-4, 2e-4, 5e-4, 1e-3]
    trials = cfg.trials or 20000
    grid = [NoiseParams.uniform(g, g * cfg.eps_over_gamma, cfg.t_m)
            for g in gammas]
    censuses = stats_mod.syndrome_census(cfg.code, grid, trials, seed=cfg.seed)
    code = codes_mod.standardized_code(codes_mod.construct_code(cfg.code))
    decoder = codes_mod.decoder_for(code)
    fit = stats_mod.weight_class_fit(censuses, decoder)
    out = Path(cfg.out_dir)
    rows = []
    for census in censuses:
        for s, c in sorted(census.counts.items()):
            rows.append({"gamma": census.gamma, "syndrome": s,
                         "leader_weight": decoder.leader_weight(s),
                         "count": c, "trials": census.trials})
    _write_csv(out / "census.csv", rows)
    hist_rows = []
    for weight in (1, 2, 3):
        hist = stats_mod.c_s_histogram(fit, decoder, weight)
        for center, count in sorted(hist.items()):
            hist_rows.append({"leader_weight": weight, "c_s_bin": center,
                              "count": count})
    _write_csv(out / "c_s_histogram.csv", hist_rows)
    scatter = [{"syndrome": s, "a_s": fit.a_s[s], "c_s": fit.c_s[s],
                "leader_weight": decoder.leader_weight(s)}
               for s in sorted(fit.a_s)]
    _write_csv(out / "a_c_scatter.csv", scatter)
    print(f"ancilla-stats: code={cfg.code} a={fit.a:.1f} a'={fit.a_prime:.1f} "
          f"({len(fit.a_s)} syndromes fitted)")
    return EXIT_OK


_COMMANDS = {
    "codes": _cmd_codes,
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "threshold": _cmd_threshold,
    "surface": _cmd_surface,
    "ancilla-stats": _cmd_ancilla_stats,
}


def run(argv: list[str]) -> int:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _merge_config(ns)
        handler = _COMMANDS[cfg.subcommand]
    except (KeyError, ValueError, OSError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return handler(cfg)
    except (ProtocolError, codes_mod.CodeConstructionError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
