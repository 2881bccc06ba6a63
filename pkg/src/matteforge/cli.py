"""Batch command line: ``matteforge <subcommand> ...``.

Exit status is 0 on success, 1 on invalid input or arguments, 2 on I/O
failure. Numbers are printed with six decimals.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import augment as aug
from . import io as mio
from ._backend import thread_count
from .brefine import BrConfig, br_refine
from .core import ShapeError, assumption1_gradient, assumption2_violation, composite, gradient_vs_alpha
from .fgrefine import RefineConfig, multiscale_refine
from .metrics import MetricReport, evaluate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _same_hw(**arrays):
    shapes = {k: v.shape[:2] for k, v in arrays.items()}
    if len(set(shapes.values())) != 1:
        raise ShapeError(f"inputs differ in size: {shapes}")


def cmd_refine_fg(args) -> None:
    fg = mio.load_image(args.fg)
    alpha = mio.load_plane(args.alpha)
    _same_hw(fg=fg, alpha=alpha)
    cfg = RefineConfig(kappa=args.kappa, scales=args.scales, iters=args.iters)
    out = multiscale_refine(fg, alpha, cfg)
    mio.save_image(args.out, np.clip(out, 0.0, 1.0), bit_depth=args.bit_depth)


def cmd_composite(args) -> None:
    fg = mio.load_image(args.fg)
    bg = mio.load_image(args.bg)
    alpha = mio.load_plane(args.alpha)
    _same_hw(fg=fg, bg=bg, alpha=alpha)
    mio.save_image(args.out, np.clip(composite(fg, bg, alpha), 0.0, 1.0), bit_depth=args.bit_depth)


def cmd_gen_trimap(args) -> None:
    alpha = mio.load_plane(args.alpha)
    mio.save_trimap(args.out, aug.gen_trimap(alpha, args.rfg, args.rbg))


def _load_entry(entry):
    fg = mio.load_image(entry.fg_path) if entry.fg_path else None
    alpha = mio.load_plane(entry.alpha_path)
    bg = mio.load_image(entry.bg_path) if entry.bg_path else None
    if fg is None:
        raise ValueError(f"manifest entry {entry.alpha_path} has no fg_path")
    arrays = {"fg": fg, "alpha": alpha}
    _same_hw(**arrays)
    return fg, alpha, bg


def cmd_augment(args) -> None:
    manifest = mio.load_manifest(args.manifest)
    cfg_dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg_dict = json.load(fh)
        if not isinstance(cfg_dict, dict):
            raise ValueError("augment config must be a JSON object")
    cfg = aug.AugmentConfig.from_dict(cfg_dict)
    seed = cfg.seed if args.seed is None else args.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = [_load_entry(e) for e in manifest.entries]
    # one independent stream per sample index
    streams = np.random.SeedSequence(seed).spawn(args.count)

    def work(i):
        rng = np.random.default_rng(streams[i])
        fg, alpha, bg = data[int(rng.integers(len(data)))]
        p = aug.sample_training_patch(fg, alpha, bg, cfg, rng)
        stem = out_dir / f"{i:06d}"
        mio.save_image(f"{stem}_fg.png", p.fg)
        mio.save_plane(f"{stem}_alpha.png", p.alpha)
        mio.save_trimap(f"{stem}_trimap.png", p.trimap)
        if p.bg is not None:
            mio.save_image(f"{stem}_bg.png", p.bg)
            mio.save_image(f"{stem}_image.png", np.clip(composite(p.fg, p.bg, p.alpha), 0.0, 1.0))

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        list(pool.map(work, range(args.count)))
    print(f"wrote {args.count} samples to {out_dir}")


def cmd_br_refine(args) -> None:
    alpha = mio.load_plane(args.alpha_init)
    trimap = mio.load_trimap(args.trimap)
    _same_hw(alpha_init=alpha, trimap=trimap)
    cfg = BrConfig(iters=args.iters, lr=args.lr, c2_weight=args.c2_weight, grid_size=args.grid)
    out, history = br_refine(alpha, trimap, cfg)
    mio.save_plane(args.out, out)
    if args.history:
        lines = ["iter\tc1\tc2\ttotal"]
        lines += [f"{h.iteration}\t{_fmt(h.c1)}\t{_fmt(h.c2)}\t{_fmt(h.total)}" for h in history]
        tmp = Path(str(args.history) + ".tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        tmp.replace(args.history)


def _print_report(report: MetricReport, as_json: bool, label: str | None = None) -> None:
    if as_json:
        d = report.as_dict()
        print(json.dumps({k: (float(_fmt(v)) if isinstance(v, float) else v) for k, v in d.items()}))
        return
    prefix = f"{label}\t" if label else ""
    print(
        f"{prefix}SAD {_fmt(report.sad)}\tMSE {_fmt(report.mse)}\t"
        f"Grad {_fmt(report.grad)}\tConn {_fmt(report.conn)}"
    )


def cmd_evaluate(args) -> None:
    if args.manifest:
        manifest = mio.load_manifest(args.manifest)

        def one(entry):
            if entry.pred_path is None or entry.trimap_path is None:
                raise ValueError(f"entry {entry.alpha_path} needs pred_path and trimap_path")
            pred = mio.load_plane(entry.pred_path)
            gt = mio.load_plane(entry.alpha_path)
            tri = mio.load_trimap(entry.trimap_path)
            _same_hw(pred=pred, gt=gt, trimap=tri)
            return evaluate(pred, gt, tri)

        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            reports = list(pool.map(one, manifest.entries))
        for entry, rep in zip(manifest.entries, reports):
            _print_report(rep, args.json, None if args.json else entry.alpha_path.name)
        if not args.json:
            mean = {k: np.mean([getattr(r, k) for r in reports]) for k in ("sad", "mse", "grad", "conn")}
            print(
                f"mean\tSAD {_fmt(mean['sad'])}\tMSE {_fmt(mean['mse'])}\t"
                f"Grad {_fmt(mean['grad'])}\tConn {_fmt(mean['conn'])}"
            )
        return
    if not (args.pred and args.gt and args.trimap):
        raise UsageError("evaluate needs --pred, --gt and --trimap (or --manifest)")
    pred = mio.load_plane(args.pred)
    gt = mio.load_plane(args.gt)
    tri = mio.load_trimap(args.trimap)
    _same_hw(pred=pred, gt=gt, trimap=tri)
    _print_report(evaluate(pred, gt, tri), args.json)


def cmd_check_assumptions(args) -> None:
    alpha = mio.load_plane(args.alpha)
    trimap = mio.load_trimap(args.trimap)
    _same_hw(alpha=alpha, trimap=trimap)
    rep = assumption2_violation(alpha, trimap)
    print(f"assumption2.max_fg_dev\t{_fmt(rep.max_fg_dev)}")
    print(f"assumption2.max_bg_dev\t{_fmt(rep.max_bg_dev)}")
    print(f"assumption2.mean_dev\t{_fmt(rep.mean_dev)}")
    print(f"assumption2.max_dev\t{_fmt(max(rep.max_fg_dev, rep.max_bg_dev))}")
    if args.fg:
        fg = mio.load_image(args.fg)
        _same_hw(alpha=alpha, fg=fg)
        print(f"assumption1.mean_grad\t{_fmt(assumption1_gradient(fg, alpha))}")
        for center, g, n in gradient_vs_alpha(fg, alpha):
            print(f"assumption1.grad_vs_alpha\t{center:.2f}\t{_fmt(g)}\t{n}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="matteforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("refine-fg", help="multi-scale foreground re-estimation")
    s.add_argument("--fg", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--scales", type=int, default=6)
    s.add_argument("--kappa", type=float, default=1.0)
    s.add_argument("--iters", type=int, default=20)
    s.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    s.set_defaults(func=cmd_refine_fg)

    s = sub.add_parser("composite", help="alpha*F + (1-alpha)*B")
    s.add_argument("--fg", required=True)
    s.add_argument("--bg", required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    s.set_defaults(func=cmd_composite)

    s = sub.add_parser("gen-trimap", help="trimap by disk dilation")
    s.add_argument("--alpha", required=True)
    s.add_argument("--rfg", type=int, required=True)
    s.add_argument("--rbg", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_trimap)

    s = sub.add_parser("augment", help="reproducible augmented training samples")
    s.add_argument("--manifest", required=True)
    s.add_argument("--config")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--count", type=int, required=True)
    s.set_defaults(func=cmd_augment)

    s = sub.add_parser("br-refine", help="backpropagating refinement of a matte")
    s.add_argument("--alpha-init", required=True)
    s.add_argument("--trimap", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--iters", type=int, default=100)
    s.add_argument("--lr", type=float, default=20.0)
    s.add_argument("--c2-weight", type=float, default=0.1)
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--history")
    s.set_defaults(func=cmd_br_refine)

    s = sub.add_parser("evaluate", help="SAD / MSE / Grad / Conn")
    s.add_argument("--pred")
    s.add_argument("--gt")
    s.add_argument("--trimap")
    s.add_argument("--manifest")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("check-assumptions", help="smoothness diagnostics of a matte/foreground")
    s.add_argument("--alpha", required=True)
    s.add_argument("--trimap", required=True)
    s.add_argument("--fg")
    s.set_defaults(func=cmd_check_assumptions)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "augment" and args.count < 0:
            raise UsageError("--count must be non-negative")
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"matteforge: I/O error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"matteforge: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
