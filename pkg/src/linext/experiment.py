"""Random-poset relative-variance experiment.

For each size ``n`` a set of random orders is drawn (each pair ``i < j``
related with probability ``edge_prob`` then closed), every importance kind
is run on every poset with and without the component recursion, and the
empirical relative variance is recorded per poset and averaged per ``n``.

Seeds: poset ``(n, index)`` uses ``SeedSequence([master_seed, n, index])``
collapsed to a 64-bit integer; sample ``s`` of that poset uses
``SeedSequence(poset_seed, spawn_key=(s,))``.  Nothing depends on which
worker runs which poset.
"""

import csv
import io
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .poset import random_poset
from .sis import ImportanceSpec, run_batch

log = logging.getLogger(__name__)

ROW_COLUMNS = [
    "n",
    "spec",
    "recursive",
    "poset_index",
    "seed",
    "samples",
    "mean_log_estimate",
    "relative_variance",
]
SUMMARY_COLUMNS = ["n", "spec", "recursive", "posets", "mean_relative_variance"]

DESK_N_VALUES = tuple(range(10, 45, 5))
PAPER_N_VALUES = tuple(range(10, 155, 5))


@dataclass
class ExperimentConfig:
    n_values: tuple = DESK_N_VALUES
    edge_prob: float = 0.2
    posets_per_n: int = 64
    samples_per_poset: int = 256
    specs: tuple = ("uniform", "descendants", "asq")
    recursive: tuple = (False, True)
    master_seed: int = 0
    output: str = "experiment.csv"
    paper_scale: bool = False

    def __post_init__(self):
        self.n_values = tuple(int(n) for n in self.n_values)
        self.specs = tuple(ImportanceSpec(s).kind for s in self.specs)
        self.recursive = tuple(bool(r) for r in self.recursive)
        if not self.n_values or min(self.n_values) < 1:
            raise ValueError("n_values must be a non-empty list of positive sizes")
        if not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError("edge_prob must lie in [0, 1]")
        if not self.paper_scale and (self.posets_per_n < 1 or self.samples_per_poset < 1):
            raise ValueError("posets_per_n and samples_per_poset must be >= 1")
        if not self.specs or not self.recursive:
            raise ValueError("need at least one spec and one recursion mode")

    @classmethod
    def paper(cls, **kwargs):
        """Full-size protocol: n = 10, 15, ..., 150 with n^2 posets and n^2 samples each."""
        kwargs.setdefault("n_values", PAPER_N_VALUES)
        return cls(paper_scale=True, posets_per_n=0, samples_per_poset=0, **kwargs)

    def posets_for(self, n):
        return n * n if self.paper_scale else self.posets_per_n

    def samples_for(self, n):
        return n * n if self.paper_scale else self.samples_per_poset

    def summary_path(self):
        out = Path(self.output)
        return out.with_name(out.stem + "_summary" + (out.suffix or ".csv"))


@dataclass
class ExperimentRow:
    n: int
    spec: str
    recursive: bool
    poset_index: int
    seed: int
    samples: int
    mean_log_estimate: float
    relative_variance: float

    def cells(self):
        return [
            str(self.n),
            self.spec,
            str(int(self.recursive)),
            str(self.poset_index),
            str(self.seed),
            str(self.samples),
            f"{self.mean_log_estimate:.17g}",
            f"{self.relative_variance:.17g}",
        ]


@dataclass
class SummaryRow:
    n: int
    spec: str
    recursive: bool
    posets: int
    mean_relative_variance: float

    def cells(self):
        return [
            str(self.n),
            self.spec,
            str(int(self.recursive)),
            str(self.posets),
            f"{self.mean_relative_variance:.17g}",
        ]


def poset_seed(master_seed, n, index):
    state = np.random.SeedSequence([master_seed, n, index]).generate_state(1, np.uint64)
    return int(state[0])


def _run_poset(job):
    n, index, config = job
    seed = poset_seed(config.master_seed, n, index)
    p = random_poset(n, config.edge_prob, seed)
    samples = config.samples_for(n)
    rows = []
    for kind in config.specs:
        spec = ImportanceSpec(kind)
        for rec in config.recursive:
            stats = run_batch(p, spec, samples, seed, recursive=rec)
            rows.append(
                ExperimentRow(
                    n, kind, rec, index, seed, samples,
                    stats.mean_log_estimate, stats.relative_variance,
                )
            )
    return rows


def run_experiment(config, workers=1):
    """All rows, ordered by ``(n, spec, recursive, poset_index)``."""
    jobs = [(n, i, config) for n in config.n_values for i in range(config.posets_for(n))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_poset, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        chunks = []
        for job in jobs:
            chunks.append(_run_poset(job))
            if job[1] == 0:
                log.info("n=%d started", job[0])
    spec_rank = {s: k for k, s in enumerate(config.specs)}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.n, spec_rank[r.spec], r.recursive, r.poset_index))
    return rows


def summarize_rows(rows):
    groups = {}
    for r in rows:
        groups.setdefault((r.n, r.spec, r.recursive), []).append(r.relative_variance)
    return [
        SummaryRow(n, spec, rec, len(vals), float(np.mean(vals)))
        for (n, spec, rec), vals in groups.items()
    ]


def _render(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow(r.cells())
    return buf.getvalue()


def rows_csv(rows):
    return _render(ROW_COLUMNS, rows)


def summary_csv(summary):
    return _render(SUMMARY_COLUMNS, summary)


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_experiment(config, workers=1):
    """Run the experiment and write the row and summary CSVs.

    Nothing is left on disk if the run fails part-way.
    """
    rows = run_experiment(config, workers=workers)
    summary = summarize_rows(rows)
    out = Path(config.output)
    written = []
    try:
        _atomic_write(out, rows_csv(rows))
        written.append(out)
        _atomic_write(config.summary_path(), summary_csv(summary))
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return rows, summary


def read_summary(path):
    with open(path, newline="") as fh:
        return [
            SummaryRow(
                int(rec["n"]),
                rec["spec"],
                rec["recursive"] == "1",
                int(rec["posets"]),
                float(rec["mean_relative_variance"]),
            )
            for rec in csv.DictReader(fh)
        ]


def mean_rv_table(summary):
    """``{(spec, recursive): {n: mean_rv}}``."""
    table = {}
    for r in summary:
        table.setdefault((r.spec, r.recursive), {})[r.n] = r.mean_relative_variance
    return table


def ordering_fraction(summary, recursive=False, order=("asq", "descendants", "uniform")):
    """Share of sizes at which the mean RVs are non-decreasing along ``order``."""
    table = mean_rv_table(summary)
    curves = [table[(s, recursive)] for s in order]
    sizes = sorted(curves[0])
    hits = sum(
        all(curves[k][n] <= curves[k + 1][n] for k in range(len(curves) - 1)) for n in sizes
    )
    return hits / len(sizes)


def recursion_gain_fraction(summary):
    """Share of ``(n, spec)`` cells where recursion does not raise the mean RV."""
    table = mean_rv_table(summary)
    cells = [
        (spec, n)
        for (spec, rec), curve in table.items()
        if not rec and (spec, True) in table
        for n in curve
    ]
    hits = sum(table[(s, True)][n] <= table[(s, False)][n] for s, n in cells)
    return hits / len(cells)
