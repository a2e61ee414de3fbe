"""Command-line entry point: ``njcones {nj,cones,classify,simulate}``."""

import argparse
import csv
import sys
from pathlib import Path

from njcones.cones import DegenerateConeError, all_cones, export_cones
from njcones.distvec import ParseError, read_distance_matrix
from njcones.evolution import ConfigError, ModelSpec, load_tree_config, preset_tree
from njcones.nj import DEFAULT_TIE_TOL, nj_run
from njcones.rays import catalog, catalog_csv
from njcones.runs import HEADER, RunRecord, classify, correct_cones, records_csv, simulate_batch

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def cmd_nj(args, out):
    d = read_distance_matrix(_read_text(args.matrix))
    result = nj_run(d, args.tol)
    newicks = sorted({o.topology.newick() for o in result.outcomes})
    line = " ".join(newicks)
    if d.n == 5:
        line += " cones: " + ", ".join(str(c) for c in sorted(result.cone_ids)) + ";"
    line += " tied" if result.tied else " not tied"
    print(line, file=out)
    for o in result.outcomes:
        print(f"picks: {o.describe_picks()}", file=out)
    return EXIT_OK


def cmd_cones(args, out):
    cones = all_cones()
    directory = Path(args.out)
    export_cones(cones.values(), directory)
    rays = catalog()
    (directory / "rays.csv").write_text(catalog_csv(rays))
    facets = {len(c.facets) for c in cones.values()}
    if facets != {9} or len(rays) != 82:
        raise AssertionError(f"unexpected cone structure: facets {facets}, {len(rays)} rays")
    print(f"{len(cones)} cones, 9 facets each, {len(rays)} rays", file=out)
    return EXIT_OK


def cmd_classify(args, out):
    d = read_distance_matrix(_read_text(args.matrix))
    if d.n != 5:
        raise ConfigError(f"classification needs a 5-taxon matrix, got n={d.n}")
    try:
        correct = correct_cones(args.true_topology)
    except ValueError as exc:
        raise ConfigError(f"bad --true-topology: {exc}") from None
    label, cones, dist = classify(d, correct)
    rec = RunRecord(Path(args.matrix).stem, "-", args.true_topology, label, cones, dist)
    w = csv.writer(out, lineterminator="\n")
    if args.header:
        w.writerow(HEADER)
    w.writerow(rec.row())
    return EXIT_OK


def _tree_from_args(args):
    if Path(args.tree).suffix == ".json" or Path(args.tree).exists():
        return load_tree_config(_read_text(args.tree))
    return preset_tree(args.tree)


def cmd_simulate(args, out):
    tree = _tree_from_args(args)
    model = ModelSpec(args.model, args.kappa)
    if args.replicates < 0:
        raise ConfigError("--replicates must be nonnegative")
    if args.length <= 0:
        raise ConfigError("--length must be positive")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    records = simulate_batch(tree, model, args.replicates, args.length, args.seed, args.jobs)
    text = records_csv(records)
    if args.out in (None, "-"):
        out.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="njcones", description="Neighbor Joining cones for five taxa.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("nj", help="run NJ on a distance matrix, reporting every tied outcome")
    s.add_argument("matrix", help="matrix file, or - for stdin")
    s.add_argument("--tol", type=float, default=DEFAULT_TIE_TOL, help="relative tie tolerance for float input")
    s.set_defaults(func=cmd_nj)

    s = sub.add_parser("cones", help="export the 30 cones and the ray catalog")
    s.add_argument("--out", default="cones", help="output directory")
    s.set_defaults(func=cmd_cones)

    s = sub.add_parser("classify", help="classify one 5-taxon matrix against a true topology")
    s.add_argument("matrix")
    s.add_argument("--true-topology", required=True, help="Newick, e.g. '((0,1),2,(3,4));'")
    s.add_argument("--header", action="store_true", help="print the CSV header first")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("simulate", help="simulate, estimate and classify a batch of replicates")
    s.add_argument("--tree", default="T1", help="preset T1/T2 or a JSON tree config file")
    s.add_argument("--model", default="JC69", help="JC69 or K2P")
    s.add_argument("--kappa", type=float, default=2.0, help="K2P transition/transversion ratio")
    s.add_argument("--replicates", type=int, default=100)
    s.add_argument("--length", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None, help="CSV path (default stdout)")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, ConfigError) as exc:
        print(f"njcones: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AssertionError, DegenerateConeError) as exc:
        print(f"njcones: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
