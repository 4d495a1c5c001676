"""Command-line entry point.

Subcommands::

    optimize       run optimizers on a JSON experiment config
    analyze-graph  centrality, vulnerability, edge criticality, clusters
    resilience     loss of efficiency and distribution distances per removal set
    emd            distance between two histogram CSV files

Exit status is 0 on success, 2 for configuration errors and 3 for bad data.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, MoeaWstError
from .graph import (
    centrality_report,
    edge_criticality_map,
    load_graph,
    loss_of_efficiency,
    network_dissimilarity,
    spectral_clustering,
    vulnerability_report,
)
from .moea.engine import ALGORITHMS, OptimizerConfig
from .moea.io import write_hv_history, write_pareto_front, write_pareto_set
from .moea.pareto import coverage_metric
from .ot import Euclidean, emd_lp, read_histogram_csv

log = logging.getLogger("moeawst")

PROBLEMS = ("sensor_placement", "recommender")
_OPTIMIZER_FIELDS = {f.name for f in fields(OptimizerConfig)} - {"seed"}


@dataclass
class ExperimentConfig:
    problem: str
    data: dict
    algorithms: list
    optimizer: OptimizerConfig
    seeds: list
    output_dir: Path | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def replications(self):
        return len(self.seeds)

    def path(self, key) -> Path:
        raw = self.data.get(key)
        if raw is None:
            raise ConfigError(f"data.{key}", "missing")
        p = Path(raw)
        if not p.is_absolute():
            p = self.base_dir / p
        if not p.is_file():
            raise ConfigError(f"data.{key}", f"file not found: {p}")
        return p


def _require(raw, key, kind):
    if key not in raw:
        raise ConfigError(key, "missing")
    val = raw[key]
    if not isinstance(val, kind):
        raise ConfigError(key, f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def parse_config(raw: dict, base_dir=None, seed=None) -> ExperimentConfig:
    """Validate a decoded JSON config.

    Keys: ``problem``, ``data``, ``algorithms`` (or ``algorithm``),
    ``optimizer`` (any :class:`OptimizerConfig` field except ``seed``),
    ``replications``, ``seeds``, ``seed`` and ``output_dir``.  Without an
    explicit ``seeds`` list, replication ``r`` uses ``seed + r``.
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    problem = _require(raw, "problem", str)
    if problem not in PROBLEMS:
        raise ConfigError("problem", f"unknown problem {problem!r}; choose from {', '.join(PROBLEMS)}")
    data = _require(raw, "data", dict)

    algos = raw.get("algorithms", raw.get("algorithm"))
    if algos is None:
        raise ConfigError("algorithms", "missing")
    if isinstance(algos, str):
        algos = [algos]
    for a in algos:
        if a not in ALGORITHMS:
            raise ConfigError("algorithms", f"unknown algorithm {a!r}")
    if len(set(algos)) != len(algos):
        raise ConfigError("algorithms", "listed twice")

    opt_raw = raw.get("optimizer", {})
    if not isinstance(opt_raw, dict):
        raise ConfigError("optimizer", "expected an object")
    unknown = set(opt_raw) - _OPTIMIZER_FIELDS
    if unknown:
        raise ConfigError("optimizer", f"unknown keys {sorted(unknown)}")
    optimizer = OptimizerConfig(**opt_raw)
    if optimizer.reference_point is not None:
        optimizer.reference_point = tuple(float(v) for v in optimizer.reference_point)
    optimizer.validate()

    base_seed = seed if seed is not None else raw.get("seed", 0)
    reps = raw.get("replications")
    seeds = raw.get("seeds")
    if seed is not None or seeds is None:
        reps = 1 if reps is None else reps
        if not isinstance(reps, int) or reps < 1:
            raise ConfigError("replications", "must be a positive integer")
        seeds = [int(base_seed) + r for r in range(reps)]
    else:
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError("seeds", "must be a list of integers")
        if reps is not None and reps != len(seeds):
            raise ConfigError("seeds", f"length {len(seeds)} differs from replications={reps}")
        if not seeds:
            raise ConfigError("seeds", "empty")

    base = Path(base_dir) if base_dir is not None else Path.cwd()
    out = raw.get("output_dir")
    if out is not None:
        # relative to the config file, like the data paths
        out = Path(out) if Path(out).is_absolute() else base / out
    cfg = ExperimentConfig(
        problem=problem,
        data=data,
        algorithms=list(algos),
        optimizer=optimizer,
        seeds=seeds,
        output_dir=out,
        base_dir=base,
    )
    return cfg


def load_config(path, seed=None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("--config", f"file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from None
    return parse_config(raw, base_dir=path.parent, seed=seed)


def build_problem(cfg: ExperimentConfig):
    if cfg.problem == "sensor_placement":
        from .wdn import T_MAX, ingest_detection_matrix, make_sp_problem, simulate_detection_matrix

        budget = cfg.data.get("budget")
        if not isinstance(budget, int) or budget < 1:
            raise ConfigError("data.budget", "must be a positive integer")
        t_max = float(cfg.data.get("t_max", T_MAX))
        if "detection_matrix" in cfg.data:
            d = ingest_detection_matrix(cfg.path("detection_matrix"), t_max=t_max)
        elif "graph" in cfg.data:
            g = load_graph(cfg.path("graph"))
            events = cfg.data.get("events", list(range(g.n)))
            locations = cfg.data.get("locations", list(range(g.n)))
            d = simulate_detection_matrix(g, events, locations, cfg.data.get("travel_time"), t_max)
        else:
            raise ConfigError("data", "needs 'detection_matrix' or 'graph'")
        return make_sp_problem(d, budget)

    from .recsys import load_ratings, make_rs_problem

    r = load_ratings(cfg.path("ratings"))
    L = cfg.data.get("list_length")
    if not isinstance(L, int) or L < 1:
        raise ConfigError("data.list_length", "must be a positive integer")
    users = cfg.data.get("users")
    if users is None:
        users = list(range(r.M))
    if not isinstance(users, list) or not all(isinstance(u, int) and 0 <= u < r.M for u in users):
        raise ConfigError("data.users", f"must be a list of user ids in [0, {r.M})")
    return make_rs_problem(r, users, L, eta=cfg.optimizer.sbx_eta)


def _write_rows(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x):
    return repr(float(x))


def write_summary(results, path):
    """Per-generation mean and population std of hypervolume over replications."""
    hv = np.array([r.hypervolumes for r in results], dtype=float)
    evals = [h.evaluations for h in results[0].history]
    rows = [
        [g, evals[g], _fmt(hv[:, g].mean()), _fmt(hv[:, g].std())]
        for g in range(hv.shape[1])
    ]
    _write_rows(path, ["generation", "evaluations", "hv_mean", "hv_std"], rows)


def run_experiment(cfg: ExperimentConfig, out: Path):
    problem = build_problem(cfg)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for algo in cfg.algorithms:
        sub = out / algo
        sub.mkdir(exist_ok=True)
        runs = []
        for r, seed in enumerate(cfg.seeds):
            opt = OptimizerConfig(**{f.name: getattr(cfg.optimizer, f.name) for f in fields(OptimizerConfig)})
            opt.seed = seed
            res = ALGORITHMS[algo](problem, opt)
            write_hv_history(res, sub / f"hv_history_{r}.csv")
            write_pareto_front(res, sub / f"pareto_front_{r}.csv")
            write_pareto_set(res, sub / f"pareto_set_{r}.csv", problem)
            runs.append(res)
            log.info("%s replication %d: final hypervolume %s", algo, r, res.hypervolumes[-1])
        write_summary(runs, sub / "summary.csv")
        results[algo] = runs
    if len(cfg.algorithms) >= 2:
        rows = []
        for r in range(cfg.replications):
            for a in cfg.algorithms:
                for b in cfg.algorithms:
                    if a != b:
                        c = coverage_metric(results[a][r].front, results[b][r].front)
                        rows.append([r, a, b, _fmt(c)])
        _write_rows(out / "coverage.csv", ["replication", "covering", "covered", "coverage"], rows)
    return results


def parse_removal_sets(specs):
    """``["0-1,2-3", "4-5"]`` becomes ``[[(0, 1), (2, 3)], [(4, 5)]]``."""
    sets = []
    for spec in specs or []:
        edges = []
        for part in spec.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                u, v = (int(x) for x in part.split("-"))
            except ValueError:
                raise ConfigError("--remove-edges", f"expected u-v pairs, got {part!r}") from None
            edges.append((u, v))
        if not edges:
            raise ConfigError("--remove-edges", f"empty removal set {spec!r}")
        sets.append(edges)
    return sets


def _removal_label(edges):
    return ";".join(f"{u}-{v}" for u, v in edges)


def resilience_rows(g, removal_sets):
    rows = []
    for edges in removal_sets:
        label = _removal_label(edges)
        rows.append([label, "loss_of_efficiency", _fmt(loss_of_efficiency(g, edges))])
        rows.append([label, "js", _fmt(network_dissimilarity(g, edges, "js"))])
        rows.append([label, "wst", _fmt(network_dissimilarity(g, edges, "wst"))])
    return rows


def analyze_graph(graph_path, out: Path, removal_sets=(), clusters=None, seed=0):
    g = load_graph(graph_path)
    out.mkdir(parents=True, exist_ok=True)
    cent = centrality_report(g)
    _write_rows(out / "centrality.csv", ["metric", "value"], [[k, _fmt(v)] for k, v in cent.as_rows()])

    vul = vulnerability_report(g)
    rows = [
        ["none", name, _fmt(getattr(vul, name))]
        for name in ("efficiency", "v_max", "v_mean", "algebraic_connectivity")
    ]
    rows += resilience_rows(g, removal_sets)
    _write_rows(out / "vulnerability.csv", ["removal", "metric", "value"], rows)

    wst = edge_criticality_map(g, "wst")
    js = edge_criticality_map(g, "js")
    _write_rows(
        out / "edge_criticality.csv",
        ["u", "v", "wst", "js"],
        [[u, v, _fmt(wst[(u, v)]), _fmt(js[(u, v)])] for u, v in g.edges],
    )
    if clusters is not None:
        # every report here works on hop counts, so edge weights are ignored
        labels = spectral_clustering(g, clusters, seed=seed, weighted=False)
        _write_rows(out / "clusters.csv", ["node", "cluster"], list(enumerate(labels)))
    return g


def build_parser():
    p = argparse.ArgumentParser(prog="moeawst", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    opt = sub.add_parser("optimize", help="run the optimizers in a JSON config")
    opt.add_argument("--config", required=True)
    opt.add_argument("--seed", type=int, help="base seed; replication r uses seed + r")
    opt.add_argument("--out", help="output directory (overrides output_dir)")

    ag = sub.add_parser("analyze-graph", help="graph resilience reports")
    ag.add_argument("graph", help="edge-list CSV: u,v[,weight]")
    ag.add_argument("--out", default=".")
    ag.add_argument("--remove-edges", action="append", default=[], metavar="U-V[,U-V...]",
                    help="one removal set; repeat for several")
    ag.add_argument("--clusters", type=int, metavar="K")
    ag.add_argument("--seed", type=int, default=0)

    res = sub.add_parser("resilience", help="effect of removing edge sets")
    res.add_argument("graph")
    res.add_argument("--remove-edges", action="append", default=[], metavar="U-V[,U-V...]")
    res.add_argument("--out", help="write resilience.csv here instead of stdout")

    emd = sub.add_parser("emd", help="Wasserstein distance between two histogram CSVs")
    emd.add_argument("first")
    emd.add_argument("second")
    emd.add_argument("--p", type=float, default=1.0, help="ground-distance exponent")
    return p


def _dispatch(args):
    if args.command == "optimize":
        cfg = load_config(args.config, seed=args.seed)
        out = Path(args.out) if args.out else cfg.output_dir
        if out is None:
            raise ConfigError("output_dir", "missing; pass --out")
        run_experiment(cfg, out)
    elif args.command == "analyze-graph":
        if args.clusters is not None and args.clusters < 1:
            raise ConfigError("--clusters", "must be positive")
        analyze_graph(args.graph, Path(args.out), parse_removal_sets(args.remove_edges),
                      args.clusters, args.seed)
    elif args.command == "resilience":
        sets = parse_removal_sets(args.remove_edges)
        if not sets:
            raise ConfigError("--remove-edges", "at least one removal set is required")
        rows = resilience_rows(load_graph(args.graph), sets)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            _write_rows(Path(args.out) / "resilience.csv", ["removal", "metric", "value"], rows)
        else:
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(["removal", "metric", "value"])
            w.writerows(rows)
    elif args.command == "emd":
        plan = emd_lp(read_histogram_csv(args.first), read_histogram_csv(args.second), Euclidean(args.p))
        print(repr(float(plan.cost)))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MoeaWstError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
