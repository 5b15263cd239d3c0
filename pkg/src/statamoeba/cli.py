"""Command-line front end.

    statamoeba classify --preset triangle --k 1 --out regions.csv
    statamoeba strata --preset fig4 --k 1 --bbox -6:6,-6:6 --res 401
    statamoeba verify --preset bump10 --expect-violation chains

Exit codes: 0 success, 1 a verify check failed, 2 bad arguments or input.
Artifacts go to ``--out`` when given, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import export
from .core_model import FunctionFamily, SubsetMask, load_model
from .errors import Lopsided, StatAmoebaError
from .evaluator import DEFAULT_TOL
from .grid import GridSpec
from .loci import extract_zero_locus, sample_zero_points, stratum_loci
from .polygon import build_closed_polygon, k_constructibility_check
from .presets import DESCRIPTIONS, default_bbox, get_preset, preset_names
from .regions import classify_grid, label_subdomains, spin_thermodynamics
from .tropical import KINDS, check_unbounded, skeleton_2d, stratum_cell_mask
from .verify import VIOLATION_GROUPS, run_verify

DEFAULT_RES = {1: 2001, 2: 401, 3: 41}
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_bbox(text: str) -> list[tuple[float, float]]:
    """``lo:hi`` per axis, comma separated."""
    box = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 2:
            raise UsageError(f"bad bbox axis {part!r}; expected lo:hi")
        try:
            lo, hi = float(bits[0]), float(bits[1])
        except ValueError:
            raise UsageError(f"bad bbox axis {part!r}") from None
        if not lo < hi:
            raise UsageError(f"bbox axis {part!r} needs lo < hi")
        box.append((lo, hi))
    return box


def parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad {what} {text!r}; expected comma-separated integers") from None


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad {what} {text!r}; expected comma-separated numbers") from None


def _join_option_values(argv: Sequence[str]) -> list[str]:
    # "--bbox -6:6,-6:6" would otherwise read as an unknown option
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--bbox", "--point"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def _model_args(p: argparse.ArgumentParser, grid: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=preset_names(), help="built-in model")
    src.add_argument("--model", type=Path, help="JSON model file")
    if grid:
        p.add_argument("--bbox", help="lo:hi per axis, comma separated")
        p.add_argument("--res", help="nodes per axis: one int or one per axis")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="zero band for log gaps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker count (default: STATAMOEBA_THREADS or auto)")


def _out_args(p: argparse.ArgumentParser, formats=FORMATS, default="json") -> None:
    p.add_argument("--out", type=Path, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=formats, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="statamoeba", description="Stratified zero loci of signed exponential sums.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify a grid into POS / NEG / ZCD / BOUNDARY cells")
    _model_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--neg-rule", choices=("ekr", "observed"), default="ekr")
    _out_args(p, default="csv")

    p = sub.add_parser("contour", help="zero locus of one stratum function")
    _model_args(p)
    p.add_argument("--subset", required=True, help="1-based elements, e.g. 1,3")
    _out_args(p)

    p = sub.add_parser("strata", help="all loci of one stratum, one file per visible subset")
    _model_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", type=Path, help="output directory (default <model>_k<k>)")
    p.add_argument("--format", choices=("json", "svg"), default="json")

    p = sub.add_parser("tropical", help="max-plus skeleton of the limit forms")
    _model_args(p)
    p.add_argument("--kind", choices=KINDS, default="affine",
                   help="affine keeps constants, homogeneous drops them")
    p.add_argument("--drop-vars", default="", help="1-based variables removed from the forms (cylindrical variant)")
    p.add_argument("--k", type=int, default=1, help="stratum for the csv membership mask")
    _out_args(p)

    p = sub.add_parser("polygon", help="closed polygon with given side lengths")
    p.add_argument("--lengths", help="comma-separated positive lengths")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=preset_names())
    src.add_argument("--model", type=Path)
    p.add_argument("--point", help="x for lengths e^{f_a(x)} from a model")
    p.add_argument("--k", type=int, help="also report k-constructibility at --point")
    _out_args(p, formats=("json", "svg"))

    p = sub.add_parser("spin", help="spin energies and partition function over the domains")
    _model_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--H", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--boltzmann", action="store_true", help="weight exp(-beta*E) instead of exp(-beta*H*sum S)")
    p.add_argument("--neg-rule", choices=("ekr", "observed"), default="ekr")
    _out_args(p, formats=("json",))

    p = sub.add_parser("verify", help="run the property checks; exit 1 on failure")
    _model_args(p)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--strata", help="comma-separated k values (default all)")
    p.add_argument("--expect-violation", action="append", default=[],
                   help=f"check or group expected to fail ({', '.join(VIOLATION_GROUPS)})")
    p.add_argument("--neg-rule", choices=("ekr", "observed"))
    p.add_argument("--rays", type=int, default=200)
    _out_args(p, formats=("json",))

    sub.add_parser("presets", help="list built-in models")
    return parser


# ---------------------------------------------------------------------------
# Shared resolution of model and grid
# ---------------------------------------------------------------------------


def _family(args) -> FunctionFamily:
    if getattr(args, "preset", None):
        return get_preset(args.preset)
    if getattr(args, "model", None):
        return load_model(args.model)
    raise UsageError("need --preset or --model")


def _grid(args, family: FunctionFamily) -> GridSpec:
    if args.bbox:
        bbox = parse_bbox(args.bbox)
    elif args.preset:
        bbox = default_bbox(args.preset)
    else:
        bbox = [(-6.0, 6.0)] * family.n
    if len(bbox) != family.n:
        raise UsageError(f"bbox has {len(bbox)} axes, model has n={family.n}")
    res = parse_ints(args.res, "resolution") if args.res else [DEFAULT_RES[family.n]]
    if len(res) not in (1, family.n):
        raise UsageError("resolution needs one value or one per axis")
    return GridSpec.make(bbox, res)


def _emit(args, text: str) -> None:
    if args.out:
        export.write_text(args.out, text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_classify(args) -> int:
    family = _family(args)
    grid = _grid(args, family)
    rmap = label_subdomains(classify_grid(family, args.k, grid, args.tol, args.neg_rule, args.threads))
    writer = {"csv": export.region_csv, "json": export.region_json, "svg": export.region_svg}[args.format]
    _emit(args, writer(rmap))
    counts = rmap.class_counts()
    print(f"k={args.k} M={rmap.M} " + " ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)
    return 0


def _subset(args, family: FunctionFamily) -> SubsetMask:
    return SubsetMask.from_elements(parse_ints(args.subset, "subset"), family.N)


def cmd_contour(args) -> int:
    family = _family(args)
    grid = _grid(args, family)
    I = _subset(args, family)
    if family.n == 3:
        if args.format != "csv":
            raise UsageError("three-dimensional loci are exported as csv point clouds")
        _emit(args, export.point_cloud_csv(sample_zero_points(family, I, grid), I))
        return 0
    if args.format == "csv":
        raise UsageError("csv contour output is for three-dimensional models")
    cs = extract_zero_locus(family, I, grid)
    _emit(args, export.contour_json(cs) if args.format == "json" else export.contours_svg([cs], grid.bbox))
    return 0


def cmd_strata(args) -> int:
    family = _family(args)
    grid = _grid(args, family)
    name = args.preset or (args.model.stem if args.model else "model")
    out = args.out or Path(f"{name}_k{args.k}")
    loci = stratum_loci(family, args.k, grid, workers=args.threads)
    for cs in loci.visible:
        tag = "-".join(map(str, cs.subset.elements))
        if args.format == "json":
            export.write_text(out / f"contour_{tag}.json", export.contour_json(cs))
        else:
            export.write_text(out / f"contour_{tag}.svg", export.contours_svg([cs], grid.bbox))
    if args.format == "svg":
        export.write_text(out / "all.svg", export.contours_svg(loci.visible, grid.bbox))
    summary = export.stratum_summary(loci)
    export.write_text(out / "summary.json", export.dumps(summary))
    empty = " ".join("{" + ",".join(map(str, s)) + "}" for s in summary["empty"]) or "none"
    print(f"visible={loci.visible_count} empty={empty} dir={out}")
    return 0


def _keep_mask(args, family: FunctionFamily) -> Optional[np.ndarray]:
    drops = parse_ints(args.drop_vars, "variable list") if args.drop_vars else []
    if not drops:
        return None
    keep = np.ones(family.n, dtype=bool)
    for v in drops:
        if not 1 <= v <= family.n:
            raise UsageError(f"variable {v} outside 1..{family.n}")
        keep[v - 1] = False
    return keep


def cmd_tropical(args) -> int:
    family = _family(args)
    grid = _grid(args, family)
    keep = _keep_mask(args, family)
    if args.format == "csv":
        mask = stratum_cell_mask(family, args.k, grid, kind=args.kind, keep=keep)
        _emit(args, export.mask_csv(mask, grid.cell_centers()))
        return 0
    skel = skeleton_2d(family, args.kind, keep)
    if args.format == "svg":
        _emit(args, export.contours_svg([], grid.bbox) if not skel.pieces else export.skeleton_svg(skel, grid.bbox))
        return 0
    report = check_unbounded(family, skel, grid, keep)
    _emit(args, export.skeleton_json(skel, {"unbounded_check": report.to_dict()}))
    return 0


def cmd_polygon(args) -> int:
    family = None
    if args.lengths:
        if args.preset or args.model:
            raise UsageError("give either --lengths or a model with --point")
        lengths = parse_floats(args.lengths, "lengths")
    else:
        if not (args.preset or args.model) or not args.point:
            raise UsageError("need --lengths, or --preset/--model with --point")
        family = _family(args)
        x = parse_floats(args.point, "point")
        if len(x) != family.n:
            raise UsageError(f"point needs {family.n} coordinates")
        f = family.evaluate(x)[0]
        lengths = list(np.exp(f - f.max()))
    try:
        poly = build_closed_polygon(lengths)
    except Lopsided as exc:
        raise UsageError(f"lengths are lopsided: entry {exc.index} is at least the sum of the others") from None
    if args.format == "svg":
        _emit(args, export.polygon_svg(poly))
    else:
        text = export.polygon_json(poly, lengths)
        if family is not None and args.k:
            ok = k_constructibility_check(family, args.k, x)
            text = export.dumps({**json.loads(text), "k": args.k, "k_constructible": ok})
        _emit(args, text)
    return 0


def cmd_spin(args) -> int:
    family = _family(args)
    grid = _grid(args, family)
    rmap = label_subdomains(classify_grid(family, args.k, grid, args.tol, args.neg_rule, args.threads))
    th = spin_thermodynamics(rmap, args.beta, args.H, args.gamma, args.boltzmann)
    doc = {
        "k": args.k,
        "beta": args.beta,
        "H": args.H,
        "gamma": args.gamma,
        "boltzmann": args.boltzmann,
        "M": rmap.M,
        "Z": th.Z,
        "states": [
            {"label": s.label, "total_spin": s.total_spin, "energy": s.energy,
             "interaction": s.interaction, "weight": s.weight}
            for s in th.states
        ],
    }
    _emit(args, export.dumps(doc))
    return 0


def cmd_verify(args) -> int:
    family = _family(args)
    if args.bbox:
        bbox = parse_bbox(args.bbox)
    elif args.preset:
        bbox = default_bbox(args.preset)
    else:
        bbox = None
    strata = parse_ints(args.strata, "strata") if args.strata else None
    report = run_verify(family, bbox, args.samples, args.seed, strata, args.expect_violation, args.neg_rule, args.rays)
    _emit(args, report.to_json() + "\n")
    for c in report.checks:
        flag = "ok" if c.passed else "FAIL"
        note = " (expected violation)" if c.expect_violation else ""
        print(f"{flag:4} {c.name}: {c.violations} violations / {c.samples}{note}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_presets(args) -> int:
    for name in preset_names():
        fam = get_preset(name)
        print(f"{name:12} n={fam.n} N={fam.N}  {DESCRIPTIONS.get(name, '')}")
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "contour": cmd_contour,
    "strata": cmd_strata,
    "tropical": cmd_tropical,
    "polygon": cmd_polygon,
    "spin": cmd_spin,
    "verify": cmd_verify,
    "presets": cmd_presets,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_join_option_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, StatAmoebaError, ValueError, KeyError, OSError) as exc:
        parser.print_usage(sys.stderr)
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"statamoeba: error: {msg}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
