"""Benchmark harness: embed once per mesh, measure imperceptibility, then run
an attack grid and record extraction correlation per cell.

Reports are a CSV (one row per stage) and a Markdown file with pivot tables
per attack family. With timing off (the default) every output byte is a pure
function of the config, so reruns are bit-identical.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus
from .attacks import AttackSpec, AttackSpecError, apply_attack, parse_attack_spec
from .mesh import Mesh, MeshError, bbox_diagonal
from .meshio import MeshParseError, load_mesh
from .metrics import surface_distance
from .qim import CapacityError
from .watermark import WatermarkKey, correlation, embed, extract, generate_watermark

_ATTACK_KINDS = ("noise", "smooth", "quant", "sim", "subdiv", "crop", "reorder")


class BenchConfigError(Exception):
    """Malformed benchmark config file."""


@dataclass
class BenchConfig:
    meshes: list = field(default_factory=list)  # (label, path-or-corpus-name) pairs
    attacks: list = field(default_factory=list)  # raw spec strings
    key1: int = WatermarkKey().key1
    delta: float = WatermarkKey().delta
    payload: int = WatermarkKey().payload
    ratio: float = WatermarkKey().ratio
    sigma: float = WatermarkKey().sigma_frac
    samples: int = 4
    seed: int = 0
    outdir: str = "bench_out"
    saliency: bool = True
    attack_metrics: bool = True
    timing: str = "none"  # none | wall

    def key(self) -> WatermarkKey:
        ratio = self.ratio if self.saliency else 1.0
        return WatermarkKey(
            key1=self.key1,
            delta=self.delta,
            payload=self.payload,
            ratio=ratio,
            sigma_frac=self.sigma,
        )


def split_attack_list(text: str) -> list[str]:
    """Split a comma list of attack specs.

    Specs themselves may contain commas (smooth:0.1,30); a fragment without a
    known kind prefix continues the previous spec.
    """
    specs: list[str] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        head = token.partition(":")[0]
        if head in _ATTACK_KINDS and ":" in token:
            specs.append(token)
        elif specs:
            specs[-1] += "," + token
        else:
            raise BenchConfigError(f"attack list starts with a parameter fragment: {token!r}")
    return specs


def _mesh_entry(token: str, base: Path) -> tuple[str, str]:
    token = token.strip()
    if token.startswith("corpus:"):
        name = token.split(":", 1)[1]
        if name not in corpus.GENERATORS:
            known = ", ".join(sorted(corpus.GENERATORS))
            raise BenchConfigError(f"unknown corpus mesh {name!r}; known: {known}")
        return name, token
    path = Path(token)
    if not path.is_absolute():
        path = base / path
    return path.stem, str(path)


_BOOL = {"on": True, "true": True, "1": True, "off": False, "false": False, "0": False}


def parse_bench_config(text: str, base_dir: str | Path = ".") -> BenchConfig:
    """Parse the flat key=value config format."""
    cfg = BenchConfig()
    base = Path(base_dir)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BenchConfigError(f"line {lineno}: expected key = value, got {line!r}")
        k, _, v = line.partition("=")
        k, v = k.strip(), v.strip()
        if k in seen:
            raise BenchConfigError(f"line {lineno}: duplicate key {k!r}")
        seen.add(k)
        try:
            if k == "meshes":
                cfg.meshes = [_mesh_entry(t, base) for t in v.split(",") if t.strip()]
            elif k == "attacks":
                cfg.attacks = split_attack_list(v)
            elif k == "key1":
                cfg.key1 = int(v)
            elif k == "delta":
                cfg.delta = float(v)
            elif k == "payload":
                cfg.payload = int(v)
            elif k == "ratio":
                cfg.ratio = float(v)
            elif k == "sigma":
                cfg.sigma = float(v)
            elif k == "samples":
                cfg.samples = int(v)
            elif k == "seed":
                cfg.seed = int(v)
            elif k == "outdir":
                cfg.outdir = v
            elif k == "saliency":
                cfg.saliency = _BOOL[v.lower()]
            elif k == "attack_metrics":
                cfg.attack_metrics = _BOOL[v.lower()]
            elif k == "timing":
                if v not in ("none", "wall"):
                    raise ValueError(v)
                cfg.timing = v
            else:
                raise BenchConfigError(f"line {lineno}: unknown key {k!r}")
        except (ValueError, KeyError) as exc:
            if isinstance(exc, BenchConfigError):
                raise
            raise BenchConfigError(f"line {lineno}: bad value for {k}: {v!r}") from None
    if not cfg.meshes:
        raise BenchConfigError("config needs a non-empty 'meshes' list")
    if not cfg.attacks:
        raise BenchConfigError("config needs a non-empty 'attacks' list")
    for spec in cfg.attacks:
        try:
            parse_attack_spec(spec)
        except AttackSpecError as exc:
            raise BenchConfigError(str(exc)) from None
    return cfg


@dataclass
class BenchRow:
    mesh: str
    stage: str  # embed | attack | error
    attack: str
    param: str
    corr: float
    mrms: float
    hd: float
    millis: int
    note: str = ""


@dataclass
class BenchResult:
    rows: list
    meta: dict


def _load_entry(entry: tuple[str, str]) -> Mesh:
    label, source = entry
    if source.startswith("corpus:"):
        return corpus.get(source.split(":", 1)[1])
    return load_mesh(source)


def _fmt(x: float) -> str:
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return f"{x:.9g}"


def run_bench(config: BenchConfig) -> BenchResult:
    key = config.key()
    payload = generate_watermark(config.key1, config.payload)
    rows: list[BenchRow] = []
    diag = {}

    def clock():
        return time.perf_counter() if config.timing == "wall" else 0.0

    def ms(t0, t1):
        return int(round((t1 - t0) * 1000)) if config.timing == "wall" else 0

    for entry in config.meshes:
        label = entry[0]
        try:
            mesh = _load_entry(entry)
        except (MeshParseError, OSError) as exc:
            rows.append(BenchRow(label, "error", "-", "-", np.nan, np.nan, np.nan, 0,
                                 note=f"load: {exc}"))
            continue
        diag[label] = bbox_diagonal(mesh)
        t0 = clock()
        try:
            marked, _report = embed(mesh, key)
        except (CapacityError, MeshError) as exc:
            rows.append(BenchRow(label, "error", "-", "-", np.nan, np.nan, np.nan, 0,
                                 note=f"embed: {exc}"))
            continue
        bits, _ = extract(marked, key)
        corr = correlation(payload, bits)
        dist = surface_distance(mesh, marked, config.samples, config.seed)
        rows.append(BenchRow(label, "embed", "-", "-", corr, dist.mrms, dist.hausdorff,
                             ms(t0, clock())))

        for i, spec_text in enumerate(config.attacks):
            spec = parse_attack_spec(spec_text, default_seed=config.seed + 1 + i)
            t0 = clock()
            try:
                attacked = apply_attack(marked, spec)
                bits_a, _ = extract(attacked, key)
            except (MeshError, CapacityError) as exc:
                rows.append(BenchRow(label, "error", spec.kind, spec.label(),
                                     np.nan, np.nan, np.nan, 0, note=str(exc)))
                continue
            corr_a = correlation(payload, bits_a)
            if config.attack_metrics:
                dist_a = surface_distance(marked, attacked, config.samples, config.seed)
                m, h = dist_a.mrms, dist_a.hausdorff
            else:
                m, h = 0.0, 0.0
            rows.append(BenchRow(label, "attack", spec.kind, spec.label(),
                                 corr_a, m, h, ms(t0, clock())))

    meta = {
        "key1": config.key1,
        "delta": config.delta,
        "payload": config.payload,
        "ratio": config.ratio if config.saliency else 1.0,
        "sigma": config.sigma,
        "saliency": "on" if config.saliency else "off",
        "samples": config.samples,
        "seed": config.seed,
        "bbox_diagonal": {k: _fmt(v) for k, v in diag.items()},
    }
    return BenchResult(rows=rows, meta=meta)


CSV_HEADER = "mesh,stage,attack,param,corr,mrms,hd,millis"


def _csv_field(text: str) -> str:
    # smooth/subdiv param labels embed commas; RFC 4180 quoting keeps 8 columns
    if "," in text or '"' in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def rows_to_csv(rows: list) -> str:
    out = [CSV_HEADER]
    for r in rows:
        out.append(
            f"{_csv_field(r.mesh)},{r.stage},{r.attack},{_csv_field(r.param)},"
            f"{_fmt(r.corr)},{_fmt(r.mrms)},{_fmt(r.hd)},{r.millis}"
        )
    return "\n".join(out) + "\n"


def _pivot(rows: list, kind: str) -> tuple[list, list]:
    """(param column order, per-mesh value dict rows) for one attack family."""
    params: list[str] = []
    meshes: list[str] = []
    values = {}
    for r in rows:
        if r.stage != "attack" or r.attack != kind:
            continue
        if r.param not in params:
            params.append(r.param)
        if r.mesh not in meshes:
            meshes.append(r.mesh)
        values[(r.mesh, r.param)] = r.corr
    table = [(m, [values.get((m, p), np.nan) for p in params]) for m in meshes]
    return params, table


def result_to_markdown(result: BenchResult, config_hash: str, version: str) -> str:
    lines = ["# Watermark benchmark report", ""]
    lines.append(f"- toolkit version: {version}")
    lines.append(f"- config sha256: {config_hash}")
    for k, v in result.meta.items():
        lines.append(f"- {k}: {v}")
    lines.append("")

    embed_rows = [r for r in result.rows if r.stage == "embed"]
    if embed_rows:
        lines.append("## Imperceptibility")
        lines.append("")
        lines.append("| Mesh | Corr | MRMS | MRMS/diag | HD |")
        lines.append("| --- | --- | --- | --- | --- |")
        for r in embed_rows:
            d = result.meta["bbox_diagonal"].get(r.mesh)
            rel = _fmt(r.mrms / float(d)) if d else "nan"
            lines.append(
                f"| {r.mesh} | {_fmt(r.corr)} | {_fmt(r.mrms)} | {rel} | {_fmt(r.hd)} |"
            )
        lines.append("")

    kinds = []
    for r in result.rows:
        if r.stage == "attack" and r.attack not in kinds:
            kinds.append(r.attack)
    if kinds:
        lines.append("## Robustness (correlation)")
        lines.append("")
        for kind in kinds:
            params, table = _pivot(result.rows, kind)
            lines.append(f"### {kind}")
            lines.append("")
            lines.append("| Mesh | " + " | ".join(params) + " |")
            lines.append("| --- |" + " --- |" * len(params))
            for mesh_label, vals in table:
                cells = " | ".join(_fmt(v) for v in vals)
                lines.append(f"| {mesh_label} | {cells} |")
            lines.append("")

    errors = [r for r in result.rows if r.stage == "error"]
    if errors:
        lines.append("## Errors")
        lines.append("")
        for r in errors:
            lines.append(f"- {r.mesh} {r.attack}:{r.param}: {r.note}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def write_reports(result: BenchResult, outdir: str | Path, config_text: str,
                  version: str) -> tuple[Path, Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_hash = hashlib.sha256(config_text.encode()).hexdigest()
    csv_path = out / "report.csv"
    md_path = out / "report.md"
    csv_path.write_text(rows_to_csv(result.rows))
    md_path.write_text(result_to_markdown(result, cfg_hash, version))
    return csv_path, md_path
