"""Command-line front end.

Subcommands: embed, extract, attack, metric, bench, saliency.

Exit codes: 0 ok, 2 parse error (mesh, config, arguments), 3 key or capacity
error, 4 attack grammar error, 5 internal error. The MESHMARK_OUTDIR
environment variable overrides the bench output directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .attacks import AttackSpecError, apply_attack, parse_attack_spec
from .bench import BenchConfigError, parse_bench_config, run_bench, write_reports
from .mesh import MeshError, bbox_diagonal, normalize
from .meshio import MeshParseError, load_mesh, save_mesh
from .metrics import surface_distance
from .qim import CapacityError
from .saliency import colored_off, compute_saliency, saliency_csv
from .watermark import (
    WatermarkKey,
    correlation,
    embed,
    extract,
    generate_watermark,
    load_key,
    save_key,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_KEY = 3
EXIT_ATTACK = 4
EXIT_INTERNAL = 5


class KeyFileError(Exception):
    pass


def _add_key_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--key", metavar="FILE", help="key file (flags below override its fields)")
    p.add_argument("--key1", type=int, help="watermark PRNG seed")
    p.add_argument("--delta", type=float, help="quantization step (normalized units)")
    p.add_argument("--payload", type=int, help="payload length in bits")
    p.add_argument("--ratio", type=float, help="salient fraction in (0, 1]")
    p.add_argument("--sigma", type=float, help="saliency scale as a fraction of bbox diagonal")


def _resolve_key(args) -> WatermarkKey:
    if args.key is not None:
        try:
            base = load_key(args.key)
        except ValueError as exc:
            raise KeyFileError(str(exc)) from None
        except OSError as exc:
            raise KeyFileError(f"cannot read key file {args.key}: {exc}") from None
    else:
        base = WatermarkKey()
    fields = {
        "key1": args.key1,
        "delta": args.delta,
        "payload": args.payload,
        "ratio": args.ratio,
        "sigma_frac": args.sigma,
    }
    overrides = {k: v for k, v in fields.items() if v is not None}
    if not overrides:
        return base
    try:
        return WatermarkKey(
            key1=overrides.get("key1", base.key1),
            delta=overrides.get("delta", base.delta),
            payload=overrides.get("payload", base.payload),
            ratio=overrides.get("ratio", base.ratio),
            sigma_frac=overrides.get("sigma_frac", base.sigma_frac),
        )
    except ValueError as exc:
        raise KeyFileError(str(exc)) from None


def _bits_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def cmd_embed(args) -> int:
    key = _resolve_key(args)
    mesh = load_mesh(args.input)
    marked, report = embed(mesh, key)
    save_mesh(marked, args.output)
    if args.save_key:
        save_key(key, args.save_key)
    counts = ",".join(str(int(c)) for c in report.carriers_per_bit)
    print(f"carriers={report.carrier_count}")
    print(f"carriers_per_bit={counts}")
    print(f"skipped_anchor={report.skipped_anchor}")
    print(f"skipped_zero_norm={report.skipped_zero_norm}")
    print(f"written={args.output}")
    return EXIT_OK


def cmd_extract(args) -> int:
    key = _resolve_key(args)
    mesh = load_mesh(args.input)
    bits, margins = extract(mesh, key)
    expected = generate_watermark(key.key1, key.payload)
    corr = correlation(expected, bits)
    print(f"bits={_bits_str(bits)}")
    print("margins=" + ",".join(f"{m:.6g}" for m in margins))
    print(f"corr={corr:.9g}")
    return EXIT_OK


def cmd_attack(args) -> int:
    spec = parse_attack_spec(args.spec, default_seed=args.seed)
    mesh = load_mesh(args.input)
    attacked = apply_attack(mesh, spec)
    save_mesh(attacked, args.output)
    print(f"attack={spec.kind}:{spec.label()}")
    print(f"written={args.output}")
    return EXIT_OK


def cmd_metric(args) -> int:
    a = load_mesh(args.mesh_a)
    b = load_mesh(args.mesh_b)
    rep = surface_distance(a, b, args.samples, args.seed)
    print(f"mrms={rep.mrms:.9g}")
    print(f"hausdorff={rep.hausdorff:.9g}")
    print(f"rms_a_to_b={rep.rms_a_to_b:.9g}")
    print(f"rms_b_to_a={rep.rms_b_to_a:.9g}")
    print(f"samples={rep.sample_count}")
    return EXIT_OK


def cmd_bench(args) -> int:
    config_text = Path(args.config).read_text()
    config = parse_bench_config(config_text, Path(args.config).resolve().parent)
    if args.no_saliency:
        config.saliency = False
    if args.outdir:
        config.outdir = args.outdir
    env_out = os.environ.get("MESHMARK_OUTDIR")
    if env_out:
        config.outdir = env_out
    result = run_bench(config)
    csv_path, md_path = write_reports(result, config.outdir, config_text, __version__)
    n_err = sum(1 for r in result.rows if r.stage == "error")
    print(f"rows={len(result.rows)}")
    print(f"errors={n_err}")
    print(f"csv={csv_path}")
    print(f"markdown={md_path}")
    return EXIT_OK


def cmd_saliency(args) -> int:
    mesh = load_mesh(args.input)
    canonical, _ = normalize(mesh)
    sigma = args.sigma_frac * bbox_diagonal(canonical)
    smap = compute_saliency(canonical, sigma)
    Path(args.csv).write_text(saliency_csv(smap))
    if args.colored:
        Path(args.colored).write_text(colored_off(canonical, smap))
    print(f"vertices={len(smap.values)}")
    print(f"csv={args.csv}")
    if args.colored:
        print(f"colored={args.colored}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshmark",
        description="Blind triangle-mesh watermarking: embed, extract, attack, benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"meshmark {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a watermark into a mesh")
    p.add_argument("input", help="input mesh (.off or .obj)")
    p.add_argument("output", help="output mesh path")
    _add_key_flags(p)
    p.add_argument("--save-key", metavar="FILE", help="also write the key file")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="blindly extract a watermark")
    p.add_argument("input", help="mesh to read")
    _add_key_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("attack", help="apply one attack from the mini-grammar")
    p.add_argument("input")
    p.add_argument("spec", help="e.g. noise:0.3, smooth:0.1,30, quant:9, sim:7, "
                                "subdiv:loop,1, crop:10, reorder:2")
    p.add_argument("output")
    p.add_argument("--seed", type=int, default=0, help="default seed for seedless specs")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("metric", help="surface distance between two meshes")
    p.add_argument("mesh_a")
    p.add_argument("mesh_b")
    p.add_argument("--samples", type=int, default=10, help="samples per triangle")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("bench", help="run the benchmark defined by a config file")
    p.add_argument("config")
    p.add_argument("--no-saliency", action="store_true",
                   help="ablation: every vertex is a carrier (ratio 1.0)")
    p.add_argument("--outdir", help="override the config output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("saliency", help="export per-vertex saliency")
    p.add_argument("input")
    p.add_argument("csv", help="output CSV path (vertex_index,saliency)")
    p.add_argument("--colored", metavar="FILE", help="also write a color-mapped COFF mesh")
    p.add_argument("--sigma-frac", type=float, default=WatermarkKey().sigma_frac,
                   help="saliency scale as a fraction of the bbox diagonal")
    p.set_defaults(func=cmd_saliency)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (MeshParseError, BenchConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (KeyFileError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_KEY
    except AttackSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ATTACK
    except MeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
