"""Command-line entry point.

Four subcommands, all writing delimited tables, a JSON summary, and
figures into --out:

    renormalize    run the induction and record per-level data
    affine-model   extract the piecewise-affine model of a map
    rigidity       compare two maps: matched towers, C2 decay, Dh checks
    cocycle-audit  class-wide intertwining checks and loop spectra

Exit codes: 0 success, 1 malformed input, 2 a theorem hypothesis failed
(the message names it), 3 precision exhausted (with the last safe depth),
4 the two renormalization paths split (with the step).
"""

import argparse
import os
import sys

from mpmath import mp, mpf

from . import report
from .affine import strong_model, transport_residuals
from .cocycle import (
    check_intertwine,
    cocycle_product,
    hyperbolicity_probe,
    periodic_central_space,
)
from .combinatorics import CombinatoricsSequence, rauzy_class, rauzy_move
from .config import config_hash, load_config, resolve_map, resolve_precision
from .errors import (
    CombinatoricsMismatch,
    GietError,
    HypothesisError,
    PrecisionExhausted,
)
from .giem import Giem, renormalize
from .rigidity import theorem_checks


def _parser():
    p = argparse.ArgumentParser(prog="giet")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("renormalize", "affine-model", "rigidity", "cocycle-audit"):
        q = sub.add_parser(name)
        q.add_argument("--config", help="JSON run description")
        q.add_argument("--map", action="append", default=None,
                       help="builtin map name; repeat for pair commands")
        q.add_argument("--out", default=".", help="artifact directory")
        q.add_argument("--depth", type=int, default=None)
        q.add_argument("--precision-bits", type=int, default=None)
        q.add_argument("--seed", type=int, default=0,
                       help="seed for randomized probes")
        q.add_argument("--linearize", action="store_true",
                       help="replace the map by its affine model first")
    return p


def _setup(args, need_pair=False):
    cfg = load_config(args.config) if args.config else {}
    mp.prec = resolve_precision(cfg, args.precision_bits)
    os.makedirs(args.out, exist_ok=True)
    digest = config_hash(cfg) if cfg else "none"
    names = args.map or []
    maps = []
    if need_pair:
        if "pair" in cfg:
            maps.append(resolve_map(cfg["pair"]["first"]))
            maps.append(resolve_map(cfg["pair"]["second"]))
        for n in names:
            maps.append(resolve_map({"kind": "builtin", "name": n}))
        if len(maps) != 2:
            raise GietError("this command needs exactly two maps "
                            "(config pair or two --map flags)")
    else:
        if "map" in cfg:
            maps.append(resolve_map(cfg["map"]))
        elif names:
            maps.append(resolve_map({"kind": "builtin", "name": names[0]}))
        else:
            raise GietError("no map given; use --map or a config file")
    depth = args.depth if args.depth is not None else cfg.get("depth")
    return cfg, digest, maps, depth


def _linearized(f, label):
    model = strong_model(f)
    return model.to_giem(), f"{label}-linearized"


def _out(args, stem):
    return os.path.join(args.out, stem)


def cmd_renormalize(args):
    cfg, digest, maps, depth = _setup(args)
    f, label = maps[0]
    if args.linearize:
        f, label = _linearized(f, label)
    depth = 30 if depth is None else depth
    history = renormalize(f, depth)
    letters = history[0].pi.alphabet
    meta = report.standard_meta(digest, map=label, depth=depth)
    rows = []
    for st in history:
        step = st.last_step
        rows.append(
            [st.level,
             "" if step is None else step.eps,
             "" if step is None else step.winner,
             st.interval_length]
            + [st.lengths()[a] for a in letters]
            + [st.tower_mass() - 1]
        )
    cols = (["level", "type", "winner", "interval_length"]
            + [f"length_{a}" for a in letters] + ["mass_drift"])
    paths = [report.write_csv(_out(args, f"{label}_levels.csv"), cols, rows, meta)]
    fig = report.lengths_figure(_out(args, f"{label}_lengths.png"), history,
                                f"{label}: level lengths")
    if fig:
        paths.append(fig)
    drift = max(abs(r[-1]) for r in rows)
    summary = {
        "map": label,
        "depth": depth,
        "types": "".join(str(st.last_step.eps) for st in history[1:]),
        "final_interval_length": history[-1].interval_length,
        "max_mass_drift": drift,
        "heights": {a: history[-1].q[a] for a in letters},
    }
    paths.append(report.write_json(_out(args, f"{label}_renormalize.json"), summary))
    for p in paths:
        print(f"wrote {p}")
    print(f"{label}: {depth} levels, max tower-mass drift {mp.nstr(drift, 3)}")
    return 0


def cmd_affine_model(args):
    cfg, digest, maps, depth = _setup(args)
    f, label = maps[0]
    if args.linearize:
        f, label = _linearized(f, label)
    depth = 100 if depth is None else depth
    if not isinstance(f, Giem):
        f = f.to_giem()
    history = renormalize(f, depth)
    model, info = strong_model(f, history=history, details=True)
    letters = history[0].pi.alphabet
    meta = report.standard_meta(digest, map=label, depth=depth)
    paths = [report.write_csv(
        _out(args, f"{label}_model.csv"),
        ["letter", "model_length", "model_slope"],
        [[a, model.lengths[a], model.slopes[a]] for a in letters],
        meta,
    )]
    ext = info["extraction"]
    if ext.checkpoints:
        paths.append(report.write_csv(
            _out(args, f"{label}_extraction.csv"),
            ["checkpoint_level", "pullback_change"],
            [(n, inc) for (n, _), inc in zip(ext.checkpoints[1:], ext.increments)],
            meta,
        ))
    lo, hi = 2, max(3, len(history) - 2)
    residuals = transport_residuals(history, lo, hi)
    paths.append(report.write_csv(
        _out(args, f"{label}_transport.csv"),
        ["level", "transport_defect"],
        list(zip(range(lo, hi), residuals)),
        meta,
    ))
    fig = report.decay_figure(
        _out(args, f"{label}_transport.png"),
        list(range(lo, hi)), {"transport defect": residuals},
        f"{label}: affine-model transport defect", "sup norm")
    if fig:
        paths.append(fig)
    summary = {
        "map": label,
        "model_lengths": dict(model.lengths),
        "model_slopes": dict(model.slopes),
        "stable_offset": info["t0"],
        "seam_break": info["seam_break"],
        "k_bound": ext.k,
        "depth": depth,
    }
    paths.append(report.write_json(_out(args, f"{label}_model.json"), summary))
    for p in paths:
        print(f"wrote {p}")
    print(f"{label}: model slopes "
          + ", ".join(f"{a}={mp.nstr(model.slopes[a], 8)}" for a in letters))
    return 0


def cmd_rigidity(args):
    cfg, digest, maps, depth = _setup(args, need_pair=True)
    (f, label_f), (g, label_g) = maps
    # model extraction wants the length chain resolved to 1e-12, which the
    # builtin pairs reach around level 94; don't default below that
    depth = 100 if depth is None else depth
    stem = f"{label_f}_vs_{label_g}"
    rep = theorem_checks(f, g, depth=depth)
    meta = report.standard_meta(digest, first=label_f, second=label_g, depth=depth)
    paths = []
    if rep.c2_levels:
        paths.append(report.write_csv(
            _out(args, f"{stem}_c2.csv"), ["level", "c2_distance"],
            list(zip(rep.c2_levels, rep.c2_distances)), meta))
        fig = report.decay_figure(
            _out(args, f"{stem}_c2.png"), rep.c2_levels,
            {"C2 distance": rep.c2_distances},
            f"{stem}: zoomed C2 distance", "distance")
        if fig:
            paths.append(fig)
    if rep.psi_rows:
        paths.append(report.write_csv(
            _out(args, f"{stem}_psi.csv"),
            ["level", "increment", "uncertainty"], rep.psi_rows, meta))
        fig = report.decay_figure(
            _out(args, f"{stem}_psi.png"),
            [r[0] for r in rep.psi_rows],
            {"|increment|": [abs(r[1]) for r in rep.psi_rows]},
            f"{stem}: conjugacy-slope ladder increments", "increment")
        if fig:
            paths.append(fig)
    if rep.dh is not None:
        paths.append(report.write_csv(
            _out(args, f"{stem}_dh.csv"),
            ["x", "fd_slope", "predicted", "rel_deviation"],
            rep.dh.rows, meta))
        fig = report.decay_figure(
            _out(args, f"{stem}_dh.png"),
            [r[0] for r in rep.dh.rows],
            {"relative deviation": [r[3] for r in rep.dh.rows]},
            f"{stem}: finite differences vs predicted slope",
            "relative deviation", xlabel="x")
        if fig:
            paths.append(fig)
    summary = {
        "first": label_f,
        "second": label_g,
        "matched_depth": rep.matched_depth,
        "mismatch_step": rep.mismatch_step,
        "model_length_gap": rep.model_length_gap,
        "model_slope_gap": rep.model_slope_gap,
        "c2_rate": None if rep.c2_fit is None else rep.c2_fit.plain.rate,
        "c8": None if rep.c8 is None else rep.c8.value,
        "c8_spread": None if rep.c8 is None else rep.c8.spread,
        "dh_max_rel_deviation": None if rep.dh is None else rep.dh.max_rel_dev,
        "psi_rate": None if rep.psi_fit is None else rep.psi_fit.plain.rate,
        "notes": list(rep.notes),
        "ok": rep.ok,
    }
    paths.append(report.write_json(_out(args, f"{stem}_rigidity.json"), summary))
    for p in paths:
        print(f"wrote {p}")
    if rep.mismatch_step is not None:
        print(f"paths split at step {rep.mismatch_step}")
        return 4
    print(f"{stem}: matched to depth {rep.matched_depth}, "
          f"dh deviation {mp.nstr(rep.dh.max_rel_dev, 3) if rep.dh else 'n/a'}")
    return 0


def cmd_cocycle_audit(args):
    cfg, digest, maps, depth = _setup(args)
    f, label = maps[0]
    pi = f.pi if isinstance(f, Giem) else f.to_giem().pi
    meta = report.standard_meta(digest, map=label)
    rows = []
    bad = 0
    for node in rauzy_class(pi):
        for eps in (0, 1):
            step = rauzy_move(node, eps)
            ok = check_intertwine(step)
            bad += not ok
            rows.append(["|".join(node.top), "|".join(node.bottom), eps,
                         step.winner, int(ok)])
    paths = [report.write_csv(
        _out(args, f"{label}_intertwine.csv"),
        ["top", "bottom", "type", "winner", "intertwines"], rows, meta)]
    summary = {
        "map": label,
        "class_size": len(rows) // 2,
        "intertwine_failures": bad,
    }
    loop = cfg.get("loop")
    if loop:
        seq = CombinatoricsSequence.from_eps(pi, list(loop))
        period = cocycle_product(seq, 0, len(seq))
        basis = periodic_central_space(seq)
        probe = hyperbolicity_probe(
            CombinatoricsSequence.from_eps(pi, list(loop) * max(1, 60 // len(seq))),
            rng_seed=args.seed)
        summary["loop"] = list(loop)
        summary["period_matrix"] = [list(r) for r in period]
        summary["central_basis"] = [list(v) for v in basis]
        summary["expansion_rate"] = probe.mu_unstable.rate
        summary["contraction_rate"] = probe.mu_stable.rate
    paths.append(report.write_json(_out(args, f"{label}_audit.json"), summary))
    for p in paths:
        print(f"wrote {p}")
    print(f"{label}: {summary['class_size']} class members audited, "
          f"{bad} intertwine failures")
    return 1 if bad else 0


def main(argv=None):
    args = _parser().parse_args(argv)
    handler = {
        "renormalize": cmd_renormalize,
        "affine-model": cmd_affine_model,
        "rigidity": cmd_rigidity,
        "cocycle-audit": cmd_cocycle_audit,
    }[args.command]
    try:
        return handler(args)
    except CombinatoricsMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PrecisionExhausted as exc:
        print(f"error: {exc} (last safe depth: {exc.safe_depth})", file=sys.stderr)
        return 3
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GietError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
