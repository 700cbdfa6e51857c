"""babyverma command line: decompose | blocks | verify | dump-module.

Exit codes: 0 pass, 1 assertion failure, 2 configuration error.
"""
from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional

import click

from .lattice import Box, LeviDatum, RootDatum, default_box, fundamental_box
from .linkage import verify_linkage
from .suites import FIELD_SUITES, RANK1_SUITES, SUITE_NAMES, Report
from .uchi import build_verma, make_structural_map
from .verma import composition_factors, label_of_weight, simple_module


@dataclass
class JobConfig:
    type_label: str = "A1"
    p: int = 3
    levi: tuple = ()
    pi: str = "zero"
    box: str = "fundamental"
    suite: Optional[str] = None
    out: Optional[str] = None
    fmt: str = "json"

    def datum(self):
        return RootDatum(self.type_label, self.p)

    def levi_datum(self):
        return LeviDatum(self.datum(), self.levi)

    def structural_map(self):
        return make_structural_map(self.datum(), self.pi)

    def make_box(self):
        return parse_box(self.box, self.datum())


def parse_levi(text, rank=None):
    if text is None:
        return ()
    if isinstance(text, (list, tuple)):
        items = [int(x) for x in text]
    else:
        text = str(text).strip().lower()
        if text in ("", "none", "empty", "[]"):
            return ()
        if text == "all":
            if rank is None:
                raise ValueError("'all' needs the rank")
            return tuple(range(rank))
        items = [int(x) for x in text.replace(" ", "").strip("[]").split(",") if x]
    if any(i < 1 for i in items):
        raise ValueError("simple roots are numbered from 1")
    return tuple(sorted({i - 1 for i in items}))


def parse_box(text, datum: RootDatum) -> Box:
    """'fundamental', 'default', or ranges 'lo..hi' (one per coordinate, or one for all)."""
    text = str(text).strip()
    if text == "fundamental":
        return fundamental_box(datum)
    if text == "default":
        return default_box(datum)
    parts = [x for x in text.split(",") if x]
    bounds = []
    for part in parts:
        lo, sep, hi = part.partition("..")
        if not sep:
            raise ValueError(f"bad box range {part!r}; expected lo..hi")
        bounds.append((int(lo), int(hi)))
    if len(bounds) == 1:
        bounds = bounds * datum.rank
    if len(bounds) != datum.rank:
        raise ValueError(f"box has {len(bounds)} ranges, rank is {datum.rank}")
    return Box(tuple(bounds))


def parse_weight(text, rank):
    vals = [int(x) for x in str(text).replace(" ", "").strip("()[]").split(",") if x]
    if len(vals) != rank:
        raise ValueError(f"weight {text!r} does not have {rank} coordinates")
    return tuple(vals)


def build_config(config_path, **flags) -> JobConfig:
    data = {}
    if config_path:
        with open(config_path) as fh:
            data = json.load(fh)
    for k, v in flags.items():
        if v is not None:
            data[k] = v
    cfg = JobConfig()
    cfg.type_label = str(data.get("type", cfg.type_label)).upper()
    cfg.p = int(data.get("p", cfg.p))
    d = RootDatum(cfg.type_label, cfg.p)        # validates type and p
    cfg.levi = parse_levi(data.get("levi"), d.rank)
    pi = data.get("pi", cfg.pi)
    cfg.pi = ",".join(map(str, pi)) if isinstance(pi, (list, tuple)) else str(pi)
    cfg.box = str(data.get("box", cfg.box))
    cfg.suite = data.get("suite")
    cfg.out = data.get("out")
    cfg.fmt = data.get("format", cfg.fmt)
    if cfg.fmt not in ("json", "csv"):
        raise ValueError("format must be json or csv")
    cfg.structural_map()
    cfg.make_box()
    return cfg


def _emit(cfg: JobConfig, payload, table=None):
    if cfg.fmt == "csv":
        if table is None:
            raise click.UsageError("this report has no CSV form; use --format json")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in table:
            w.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_or_exit(config_path, **flags):
    try:
        return build_config(config_path, **flags)
    except (ValueError, KeyError, OSError) as exc:
        raise click.UsageError(str(exc))


_common = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
                 help="JSON file with any of the flags below; flags override it."),
    click.option("--type", "type_", default=None, help="Root system: A1, A2 or B2."),
    click.option("--p", type=int, default=None, help="Odd prime."),
    click.option("--levi", default=None, help="Simple roots in I, e.g. '1,2'; 'none' or 'all'."),
    click.option("--pi", default=None, help="'zero', 'generic' or values pi(h_i), e.g. '0,s'."),
    click.option("--box", default=None, help="'fundamental', 'default' or ranges 'lo..hi,lo..hi'."),
    click.option("--out", default=None, type=click.Path(dir_okay=False), help="Output file."),
    click.option("--format", "fmt", default=None, type=click.Choice(["json", "csv"])),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@click.group()
def main():
    """Baby Verma modules in standard Levi form."""


@main.command()
@common
def decompose(config_path, type_, p, levi, pi, box, out, fmt):
    """Decomposition matrix [Z(lam) : L(mu)] over the box."""
    cfg = _config_or_exit(config_path, type=type_, p=p, levi=levi, pi=pi, box=box, out=out, format=fmt)
    lv, pm = cfg.levi_datum(), cfg.structural_map()
    rows = []
    labels = {}
    for lam in cfg.make_box():
        cf = composition_factors(build_verma(lv, pm, lam))
        for lab in cf:
            labels[str(lab)] = lab
        rows.append((lam, cf))
    cols = sorted(labels.values())
    payload = {
        "type": cfg.type_label, "p": cfg.p, "levi": [i + 1 for i in cfg.levi], "pi": cfg.pi,
        "columns": [{"label": str(c), "dim": c.dim, "grade": list(c.grade), "residues": list(c.residues)}
                    for c in cols],
        "rows": [{"lambda": list(lam), "label": str(label_of_weight(lv, pm, lam)),
                  "factors": {str(l): n for l, n in cf.items()},
                  "dims": sum(l.dim * n for l, n in cf.items())} for lam, cf in rows],
    }
    table = [["lambda"] + [str(c) for c in cols]]
    for lam, cf in rows:
        table.append([" ".join(map(str, lam))] + [cf.get(c, 0) for c in cols])
    _emit(cfg, payload, table)


@main.command()
@common
def blocks(config_path, type_, p, levi, pi, box, out, fmt):
    """Predicted linkage classes and their comparison with computed factors."""
    cfg = _config_or_exit(config_path, type=type_, p=p, levi=levi, pi=pi, box=box, out=out, format=fmt)
    res = verify_linkage(cfg.structural_map(), cfg.levi_datum(), cfg.make_box())
    comp_of = {tuple(m): i for i, c in enumerate(res["components"]) for m in c}
    table = [["lambda", "class", "component"]]
    for i, cls in enumerate(res["classes"]):
        for m in cls:
            table.append([" ".join(map(str, m)), i, comp_of[tuple(m)]])
    _emit(cfg, res, table)
    sys.exit(0 if res["ok"] else 1)


@main.command()
@common
@click.option("--suite", default=None, type=click.Choice(SUITE_NAMES + ["all"]), help="Suite to run.")
def verify(config_path, type_, p, levi, pi, box, out, fmt, suite):
    """Run a verification suite and report pass/fail per assertion."""
    cfg = _config_or_exit(config_path, type=type_, p=p, levi=levi, pi=pi, box=box, out=out, format=fmt,
                          suite=suite)
    names = [cfg.suite] if cfg.suite and cfg.suite != "all" else None
    if names is None:
        names = sorted(FIELD_SUITES) + (sorted(RANK1_SUITES) if cfg.type_label == "A1" else [])
    reports = []
    for name in names:
        if name in RANK1_SUITES:
            if cfg.type_label != "A1":
                raise click.UsageError(f"suite {name} is only available in rank 1 (A1)")
            reports.append(RANK1_SUITES[name](cfg.p))
        elif name in FIELD_SUITES:
            reports.append(FIELD_SUITES[name](cfg.levi_datum(), cfg.structural_map(), cfg.make_box()))
        else:
            raise click.UsageError(f"unknown suite {name}")
    payload = {"config": {"type": cfg.type_label, "p": cfg.p, "levi": [i + 1 for i in cfg.levi],
                          "pi": cfg.pi, "box": cfg.box},
               "ok": all(r.ok for r in reports), "reports": [r.to_json() for r in reports]}
    table = [["suite", "statement", "passed", "failed", "ok"]]
    for r in reports:
        j = r.to_json()
        table.append([r.suite, r.statement, j["passed"], j["failed"], r.ok])
    _emit(cfg, payload, table)
    sys.exit(0 if payload["ok"] else 1)


@main.command("dump-module")
@common
@click.option("--lam", required=True, help="Highest weight, e.g. '1,0'.")
@click.option("--twist", default=None, help="Reduced word of w in W^I, e.g. '1,2'.")
@click.option("--simple", is_flag=True, help="Dump L(lam) instead of Z(lam).")
def dump_module(config_path, type_, p, levi, pi, box, out, fmt, lam, twist, simple):
    """Serialize a (twisted) baby Verma module or its simple head."""
    cfg = _config_or_exit(config_path, type=type_, p=p, levi=levi, pi=pi, box=box, out=out, format=fmt)
    d = cfg.datum()
    try:
        weight = parse_weight(lam, d.rank)
        w = d.element(tuple(int(x) - 1 for x in twist.split(","))) if twist else None
        lv, pm = cfg.levi_datum(), cfg.structural_map()
        if simple:
            if w is not None:
                raise ValueError("--simple takes no twist")
            M = simple_module(lv, pm, weight)
        else:
            M = build_verma(lv, pm, weight, w)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    cfg.fmt = "json"
    _emit(cfg, M.to_json())


if __name__ == "__main__":
    main()
