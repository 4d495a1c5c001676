"""CSV serialization of optimizer runs.

Floats are written with ``repr`` so files are byte-stable for a given run.
"""

from __future__ import annotations

import csv
from pathlib import Path


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _fmt(x):
    return repr(float(x))


def write_hv_history(result, path):
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["generation", "evaluations", "hypervolume", "elapsed_ms"])
        for h in result.history:
            w.writerow([h.generation, h.evaluations, _fmt(h.hypervolume), _fmt(h.elapsed_ms)])


def write_pareto_front(result, path):
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(list(result.objective_names))
        for row in result.natural_front:
            w.writerow([_fmt(v) for v in row])


def write_pareto_set(result, path, problem):
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["genotype"])
        for ind in result.pareto:
            w.writerow([problem.format_genotype(ind.genotype)])


def read_hv_history(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        (int(r["generation"]), int(r["evaluations"]), float(r["hypervolume"]), float(r["elapsed_ms"]))
        for r in rows
    ]
