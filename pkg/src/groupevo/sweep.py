"""The alpha/beta parameter grid: GED, instance extraction and cross-validation
for every cell, plus matrix rendering in the beta-by-alpha layout."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .communities import Group, GroupKey
from .errors import InputError
from .evochain import TARGET_CLASSES, extract_instances
from .ged import EventType, GedParams, build_evolution_graph
from .learn import ClassifierSpec, cross_validate, make_dataset

logger = logging.getLogger(__name__)

DEFAULT_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
MIN_INSTANCES = 10


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    beta: float
    classifier: str
    weighted_f: float | None
    class_f: tuple[float, ...] | None
    n_instances: int
    n_edges: int
    histogram: tuple[tuple[str, int], ...]

    @property
    def evaluable(self) -> bool:
        return self.weighted_f is not None


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    alphas: tuple[float, ...] = ()
    betas: tuple[float, ...] = ()

    def get(self, alpha: float, beta: float, classifier: str) -> SweepRow:
        for row in self.rows:
            if row.alpha == alpha and row.beta == beta and row.classifier == classifier:
                return row
        raise KeyError((alpha, beta, classifier))

    @property
    def classifiers(self) -> list[str]:
        return list(dict.fromkeys(r.classifier for r in self.rows))

    def best(self, classifier: str) -> SweepRow | None:
        rows = [r for r in self.rows if r.classifier == classifier and r.evaluable]
        return max(rows, key=lambda r: r.weighted_f) if rows else None


def cell_seed(master: int, alpha: float, beta: float, classifier: str) -> int:
    digest = hashlib.sha256(f"{master}|{alpha!r}|{beta!r}|{classifier}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def percent(x: float) -> str:
    return f"{x * 100:g}"


def run_cell(
    groups: Mapping[int, Sequence[Group]],
    ni: Mapping[GroupKey, Mapping[str, float]] | None,
    alpha: float,
    beta: float,
    specs: Sequence[ClassifierSpec],
    seed: int,
    min_instances: int = MIN_INSTANCES,
    folds: int = 10,
    steps: int = 4,
) -> list[SweepRow]:
    """One (alpha, beta) cell for every classifier; seeds are per cell and classifier."""
    edges = build_evolution_graph(groups, ni, GedParams(alpha, beta))
    hist = Counter(e.event for e in edges)
    histogram = tuple((e.value, hist.get(e, 0)) for e in EventType)
    instances = extract_instances(edges, groups, steps=steps)
    rows = []
    evaluable = len(instances) >= max(min_instances, folds)
    dataset = make_dataset(instances) if evaluable else None
    for spec in specs:
        if dataset is None:
            rows.append(SweepRow(alpha, beta, spec.name, None, None, len(instances), len(edges), histogram))
            continue
        cell_spec = ClassifierSpec(spec.kind, dict(spec.hyperparameters), cell_seed(seed, alpha, beta, spec.name))
        report = cross_validate(dataset, cell_spec, folds)
        rows.append(
            SweepRow(
                alpha,
                beta,
                spec.name,
                report.weighted_f,
                tuple(float(x) for x in report.f),
                len(instances),
                len(edges),
                histogram,
            )
        )
    return rows


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(
    groups: Mapping[int, Sequence[Group]],
    ni: Mapping[GroupKey, Mapping[str, float]] | None,
    alphas: Sequence[float] = DEFAULT_GRID,
    betas: Sequence[float] = DEFAULT_GRID,
    specs: Sequence[ClassifierSpec] = (),
    seed: int = 0,
    min_instances: int = MIN_INSTANCES,
    folds: int = 10,
    steps: int = 4,
    workers: int = 1,
) -> SweepResult:
    if not alphas or not betas or not specs:
        raise InputError("alpha set, beta set and classifier list must be non-empty")
    if len(groups) < steps + 1:
        raise InputError(f"need at least {steps + 1} frames of groups, got {len(groups)}")
    alphas = tuple(sorted(set(alphas)))
    betas = tuple(sorted(set(betas)))
    cells = [(a, b) for b in betas for a in alphas]
    jobs = [(groups, ni, a, b, tuple(specs), seed, min_instances, folds, steps) for a, b in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    else:
        results = [_run_cell_args(job) for job in jobs]
    by_cell = dict(zip(cells, results))
    rows = [row for cell in cells for row in by_cell[cell]]
    if not any(r.evaluable for r in rows):
        raise InputError(f"no (alpha, beta) cell yields at least {min_instances} instances")
    return SweepResult(rows, alphas, betas)


def render_matrix(result: SweepResult, classifier: str) -> str:
    """CSV with beta rows and alpha columns (ascending, in percent); cells are
    weighted F to three decimals or ``NA``."""
    if classifier not in result.classifiers:
        raise InputError(f"classifier {classifier!r} is not part of the sweep")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["beta\\alpha", *(percent(a) for a in result.alphas)])
    for b in result.betas:
        cells = []
        for a in result.alphas:
            row = result.get(a, b, classifier)
            cells.append("NA" if row.weighted_f is None else f"{row.weighted_f:.3f}")
        writer.writerow([percent(b), *cells])
    return buf.getvalue()


def format_sweep(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "alpha",
            "beta",
            "classifier",
            "weighted_f",
            *(f"f_{c.value}" for c in TARGET_CLASSES),
            "instances",
            "edges",
            *(f"n_{e.value}" for e in EventType),
        ]
    )
    for r in result.rows:
        f_cells = [repr(x) for x in r.class_f] if r.class_f else ["NA"] * len(TARGET_CLASSES)
        writer.writerow(
            [
                repr(r.alpha),
                repr(r.beta),
                r.classifier,
                "NA" if r.weighted_f is None else repr(r.weighted_f),
                *f_cells,
                r.n_instances,
                r.n_edges,
                *(n for _, n in r.histogram),
            ]
        )
    return buf.getvalue()


def write_sweep(result: SweepResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "sweep.csv"]
    paths[0].write_text(format_sweep(result), encoding="utf-8", newline="\n")
    for clf in result.classifiers:
        p = out / f"matrix_{clf}.csv"
        p.write_text(render_matrix(result, clf), encoding="utf-8", newline="\n")
        paths.append(p)
    return paths
