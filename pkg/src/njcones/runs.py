"""Per-replicate classification records and simulation batches."""

import csv
import io
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from njcones.cones import distance_to_misclassification
from njcones.evolution import estimate_from_codes, replicate_rng, simulate_codes
from njcones.nj import nj_run
from njcones.topology import topology_from_newick

CLASSES = ("correct", "incorrect", "boundary", "saturated")
HEADER = ("replicate", "model", "tree", "classification", "cones", "distance")
SUMMARY_HEADER = ("#summary", "class", "count", "mean", "variance")


@dataclass(frozen=True)
class RunRecord:
    replicate: object
    model: str
    tree: str
    classification: str
    cones: frozenset = frozenset()
    distance: float = None

    def __post_init__(self):
        if self.classification not in CLASSES:
            raise ValueError(f"unknown classification {self.classification!r}")
        if self.distance is not None and self.distance < 0:
            raise AssertionError(f"negative robustness distance {self.distance}")

    def row(self):
        dist = "" if self.distance is None else format(self.distance, ".12g")
        return [
            str(self.replicate),
            self.model,
            self.tree,
            self.classification,
            ";".join(str(c) for c in sorted(self.cones)),
            dist,
        ]


def correct_cones(newick):
    return frozenset(topology_from_newick(newick).cone_ids())


def classify(d, correct):
    """Return ``(classification, nj cone ids, robustness distance)``."""
    correct = frozenset(correct)
    cones = nj_run(d).cone_ids
    if cones <= correct:
        label = "correct"
    elif cones & correct:
        label = "boundary"
    else:
        label = "incorrect"
    return label, cones, distance_to_misclassification(d, correct, cones)


def run_replicate(tree, model, length, seed, replicate, correct=None):
    if correct is None:
        correct = correct_cones(tree.topology)
    codes = simulate_codes(tree, model, length, replicate_rng(seed, replicate))
    est = estimate_from_codes(codes, model)
    if not est.valid:
        return RunRecord(replicate, str(model), tree.name, "saturated")
    label, cones, dist = classify(est.distances, correct)
    return RunRecord(replicate, str(model), tree.name, label, cones, dist)


def _run_chunk(args):
    tree, model, length, seed, ids = args
    correct = correct_cones(tree.topology)
    return [run_replicate(tree, model, length, seed, k, correct) for k in ids]


def simulate_batch(tree, model, replicates, length=500, seed=0, jobs=1):
    """Records for replicates ``0..replicates-1``, in replicate order."""
    ids = list(range(replicates))
    if jobs <= 1 or replicates < 2:
        return _run_chunk((tree, model, length, seed, ids))
    size = max(1, -(-replicates // (4 * jobs)))
    chunks = [(tree, model, length, seed, ids[i : i + size]) for i in range(0, replicates, size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return [rec for part in pool.map(_run_chunk, chunks) for rec in part]


def summarize(records):
    """``{class: (count, mean, variance)}``; mean/variance are None when undefined."""
    out = {}
    for cls in CLASSES:
        dists = [r.distance for r in records if r.classification == cls and r.distance is not None]
        count = sum(r.classification == cls for r in records)
        mean = statistics.fmean(dists) if dists else None
        var = statistics.pvariance(dists) if dists else None
        out[cls] = (count, mean, var)
    return out


def _fmt(x):
    return "" if x is None else format(x, ".12g")


def records_csv(records, footer=True):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in records:
        w.writerow(r.row())
    if footer:
        w.writerow(SUMMARY_HEADER)
        for cls, (count, mean, var) in summarize(records).items():
            w.writerow(["#summary", cls, count, _fmt(mean), _fmt(var)])
    return buf.getvalue()


def read_records_csv(text):
    """Parse rows written by :func:`records_csv` (footer lines are skipped)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows or tuple(rows[0]) != HEADER:
        raise ValueError("missing run-record header")
    return [dict(zip(HEADER, r)) for r in rows[1:]]
