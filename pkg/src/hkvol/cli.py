"""Command-line interface: reproducible runs with JSON/CSV/SVG artifacts.

Every subcommand writes its outputs under ``--output-dir`` together with a
``manifest.json`` echoing the fully resolved configuration; identical
invocations produce byte-identical artifacts.  Exit codes: 0 success,
1 numeric failure, 2 validation/usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domains import (
    DefiningFunction,
    SphereBoundary,
    QuadratureSpec,
    ball_rho,
    cvx_model_rho,
    fefferman_density,
    fefferman_integral,
    polynomial_rho,
    siegel_rho,
)
from .darboux import theta_composite, probe_report
from .gallery import bidisc_demo, lemniscate_demo, lemniscate_sandwich
from .heis import HPoint, KoranyiBall, sigma_k_card
from .integrate import IntegrationSpec
from .powerdiag import HPowerDiagram, balls_bounding_box
from .siegel import SiegelDomain, Cut, BoundaryPoint, cut_volume, ball_rvolume, union_cut_volume_mc
from .tilings import (
    BallConfiguration,
    LOWER_CONST,
    UPPER_CONST,
    asymptotics_harness,
    build_pk,
    estimate_vn,
    lattice_balls,
    lower_bound_check,
    upper_bound_closed,
)

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command", "config", "outputs"],
    "properties": {
        "command": {"type": "string"},
        "config": {"type": "object"},
        "outputs": {"type": "array", "items": {"type": "string"}},
    },
}


def fmt(x: float) -> str:
    """Floats with 17 significant digits, '.' decimal, round-trip safe."""
    return format(float(x), ".17g")


def validate_manifest(doc) -> bool:
    """Check a manifest document against MANIFEST_SCHEMA (minimal validator)."""
    if not isinstance(doc, dict):
        return False
    for key in MANIFEST_SCHEMA["required"]:
        if key not in doc:
            return False
    return (
        isinstance(doc["command"], str)
        and isinstance(doc["config"], dict)
        and isinstance(doc["outputs"], list)
        and all(isinstance(s, str) for s in doc["outputs"])
    )


@dataclass
class RunConfig:
    """Resolved run configuration; echoed verbatim into the manifest."""

    command: str
    options: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    outputs: list = field(default_factory=list)

    def path(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.outputs.append(name)
        return self.output_dir / name

    def write_json(self, name: str, payload) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return p

    def write_csv(self, name: str, header, rows) -> Path:
        p = self.path(name)
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
        return p

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "config": {k: self.options[k] for k in sorted(self.options)},
            "outputs": sorted(self.outputs),
        }
        assert validate_manifest(manifest)
        p = self.output_dir / "manifest.json"
        self.output_dir.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hkvol"
    import matplotlib.pyplot as plt

    return plt


def _save_svg(plt, fig, path: Path) -> None:
    # drop the volatile date metadata so identical runs are byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def balls_to_json(balls) -> list:
    return [
        {"center": [b.center.z1.real, b.center.z1.imag, b.center.x2], "radius": b.radius}
        for b in balls
    ]


def balls_from_json(doc) -> tuple:
    return tuple(
        KoranyiBall(HPoint(complex(d["center"][0], d["center"][1]), d["center"][2]), d["radius"])
        for d in doc
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_volumes(cfg: RunConfig, args) -> int:
    spec = IntegrationSpec(samples=args.samples, seed=args.seed)
    records = []
    for delta in args.delta:
        closed = cut_volume(delta) / args.lam ** 4
        cut = Cut(BoundaryPoint(0j, 0.0), delta)
        mc = union_cut_volume_mc([cut], spec, SiegelDomain(args.lam))
        records.append(
            {
                "delta": delta,
                "closed_form": closed,
                "mc_value": mc.value,
                "mc_stderr": mc.stderr,
                "ball_rvolume": ball_rvolume(math.sqrt(delta)),
            }
        )
    cfg.write_json("volumes.json", records)
    cfg.write_csv(
        "volumes.csv",
        ["delta", "closed_form", "mc_value", "mc_stderr", "ball_rvolume"],
        [[r["delta"], r["closed_form"], r["mc_value"], r["mc_stderr"], r["ball_rvolume"]] for r in records],
    )
    for r in records:
        print(f"delta={fmt(r['delta'])}: closed={fmt(r['closed_form'])} mc={fmt(r['mc_value'])}")
    return 0


def cmd_diagram(cfg: RunConfig, args) -> int:
    if args.balls:
        balls = balls_from_json(json.loads(Path(args.balls).read_text()))
    else:
        balls = tuple(lattice_balls(args.k))
    diag = HPowerDiagram(balls)
    rng = np.random.Generator(np.random.Philox(args.seed))
    lo, hi = balls_bounding_box(balls)
    pts = rng.uniform(size=(args.samples, 3)) * (hi - lo) + lo
    cells = diag.classify_arr(pts)
    keep = cells >= 0
    cfg.write_csv(
        "diagram_points.csv",
        ["x1", "y1", "x2", "cell_index"],
        [[float(p[0]), float(p[1]), float(p[2]), int(c)] for p, c in zip(pts[keep], cells[keep])],
    )

    # slice {x1 = const} colored by cell index
    plt = _figure()
    res = 400
    y1 = np.linspace(lo[1], hi[1], res)
    x2 = np.linspace(lo[2], hi[2], res)
    yy, xx = np.meshgrid(y1, x2, indexing="ij")
    grid = np.stack([np.full(yy.size, args.slice_x1), yy.ravel(), xx.ravel()], axis=1)
    img = diag.classify_arr(grid).reshape(res, res).astype(float)
    img[img < 0] = np.nan
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.imshow(
        img.T,
        origin="lower",
        extent=(lo[1], hi[1], lo[2], hi[2]),
        aspect="auto",
        cmap="tab20",
        interpolation="nearest",
    )
    ax.set_xlabel("y1")
    ax.set_ylabel("x2")
    ax.set_title(f"horizontal power diagram slice x1 = {args.slice_x1:g}")
    _save_svg(plt, fig, cfg.path("diagram_slice.svg"))
    print(f"diagram: {len(balls)} balls, {int(keep.sum())} classified points")
    return 0


def cmd_tile(cfg: RunConfig, args) -> int:
    poly = build_pk(args.k)
    balls = lattice_balls(args.k)
    n = len(poly.cuts)
    payload = {
        "k": args.k,
        "cut_count": n,
        "expected_count": sigma_k_card(args.k),
        "delta": poly.delta,
        "ball_radius": balls[0].radius,
        "upper_bound": upper_bound_closed(args.k),
    }
    cfg.write_json("tile.json", payload)
    cfg.write_json("tile_config.json", balls_to_json(balls))
    print(f"tile k={args.k}: {n} cuts, delta={fmt(poly.delta)}")
    return 0


def cmd_bounds(cfg: RunConfig, args) -> int:
    payload = {
        "k": args.k,
        "n": sigma_k_card(args.k),
        "upper_bound": upper_bound_closed(args.k),
        "upper_constant": UPPER_CONST,
        "lower_constant": LOWER_CONST,
    }
    cfg.write_json("bounds.json", payload)
    print(f"bounds k={args.k}: upper={fmt(payload['upper_bound'])}")
    return 0


def cmd_optimize(cfg: RunConfig, args) -> int:
    best = None
    for restart in range(args.restarts):
        c, rec = estimate_vn(args.n, seed=args.seed + restart, budget=args.budget)
        if best is None or rec.gap < best[1].gap:
            best = (c, rec)
    conf, rec = best
    ok, s4 = lower_bound_check(conf)
    if not ok:
        print("covering lower bound violated", file=sys.stderr)
        return 1
    cfg.write_json("config.json", balls_to_json(conf.balls))
    cfg.write_json(
        "optimize.json",
        {
            "n": rec.n,
            "gap": rec.gap,
            "stderr": rec.gap_stderr,
            "sqrt_n_gap": rec.sqrt_n_gap,
            "sum_rad4": s4,
            "config_path": "config.json",
        },
    )
    print(f"optimize n={rec.n}: gap={fmt(rec.gap)} sqrt_n_gap={fmt(rec.sqrt_n_gap)}")
    return 0


def cmd_asymptotics(cfg: RunConfig, args) -> int:
    records = asymptotics_harness(k_max=args.k_max, seed=args.seed, budget=args.budget)
    cfg.write_csv(
        "asymptotics.csv",
        ["n", "gap", "gap_stderr", "sqrt_n_gap"],
        [[r.n, r.gap, r.gap_stderr, r.sqrt_n_gap] for r in records],
    )
    cfg.write_json(
        "asymptotics.json",
        [
            {"n": r.n, "gap": r.gap, "stderr": r.gap_stderr, "sqrt_n_gap": r.sqrt_n_gap}
            for r in records
        ],
    )
    for r in records:
        print(f"n={r.n}: sqrt_n_gap={fmt(r.sqrt_n_gap)}")
    return 0


def _resolve_rho(args) -> DefiningFunction:
    if args.domain == "ball":
        return ball_rho(1.0)
    if args.domain == "siegel":
        return siegel_rho(args.lam)
    if args.domain == "cvx":
        return cvx_model_rho(args.lam, complex(*args.mu), args.nu, args.beta)
    doc = json.loads(Path(args.rho_json).read_text())
    return polynomial_rho(doc["terms"])


def cmd_fefferman(cfg: RunConfig, args) -> int:
    rho = _resolve_rho(args)
    if args.domain != "ball":
        raise ValueError("boundary quadrature is currently wired for --domain ball")
    boundary = SphereBoundary()
    quad = QuadratureSpec(nodes=args.nodes)
    integral = fefferman_integral(rho, boundary, quad)
    cfg.write_json("fefferman.json", {"domain": args.domain, "integral": integral})
    # density samples along a boundary great circle
    rows = []
    for t in np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False):
        z = (complex(math.cos(t), math.sin(t)), 0j)
        rows.append([float(t), fefferman_density(rho, *z)])
    cfg.write_csv("density_samples.csv", ["t", "density"], rows)
    print(f"fefferman {args.domain}: integral={fmt(integral)}")
    return 0


def cmd_darboux(cfg: RunConfig, args) -> int:
    rho = cvx_model_rho(args.lam, complex(*args.mu), args.nu, args.beta)
    theta = theta_composite(rho, args.lam, radius=args.radius)
    rep = probe_report(theta, radius=args.probe_radius, n_pairs=args.pairs, seed=args.seed)
    cfg.write_json("darboux.json", {"domain": "cvx", "lam": args.lam, **rep})
    print(f"darboux: distance ratio discrepancy={fmt(rep['ratio'])}")
    return 0


def cmd_demo(cfg: RunConfig, args) -> int:
    if args.model == "lemniscate":
        rep = lemniscate_demo(tuple(args.n))
        cfg.write_csv(
            "lemniscate_trend.csv",
            ["n", "n_gap_area", "gap_area"],
            [
                [n, s, a]
                for n, s, a in zip(rep.n_values, rep.statistic, rep.details["gap_area"])
            ],
        )
        cfg.write_json(
            "lemniscate.json",
            {"n": list(rep.n_values), "statistic": list(rep.statistic), "verdict": rep.verdict},
        )
        _lemniscate_svg(cfg, max(args.n))
        print(f"lemniscate verdict: {rep.verdict}")
        return 0
    rep = bidisc_demo(tuple(args.m))
    cfg.write_csv(
        "bidisc_trend.csv",
        ["m", "n", "sqrt_n_gap"],
        [[int(math.isqrt(n)), n, s] for n, s in zip(rep.n_values, rep.statistic)],
    )
    cfg.write_json(
        "bidisc.json",
        {"n": list(rep.n_values), "statistic": list(rep.statistic), "verdict": rep.verdict},
    )
    print(f"bidisc verdict: {rep.verdict}")
    return 0


def _lemniscate_svg(cfg: RunConfig, n: int) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 5))
    th = np.linspace(0.0, 2.0 * math.pi, 2048)
    ax.plot(np.cos(th), np.sin(th), color="black", lw=0.8)
    # removed caps at the 2n-th roots of unity
    for k in range(2 * n):
        a = math.pi * k / n
        cap = plt.Circle((math.cos(a), math.sin(a)), math.pi / n, color="tab:red", alpha=0.4)
        ax.add_patch(cap)
    for r, style, label in (
        (1.0 - math.pi / n, "--", "inner"),
        (1.0 - math.sqrt(3.0) * math.pi / (2.0 * n), ":", "outer"),
    ):
        ax.plot(r * np.cos(th), r * np.sin(th), style, color="tab:blue", lw=1.0, label=label)
    ax.set_aspect("equal")
    ax.legend(loc="lower left", fontsize=8)
    ax.set_title(f"cut domain and sandwich circles, n = {n}")
    _save_svg(plt, fig, cfg.path("lemniscate.svg"))


# ---------------------------------------------------------------------------
# parser / dispatch


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=Path, default=Path("out"))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=0, help="0 = all logical cores")

    def with_common(**kw):
        return argparse.ArgumentParser(parents=[common], **kw)

    p = argparse.ArgumentParser(prog="hkvol", description=__doc__, parents=[common])
    sub = p.add_subparsers(dest="command", parser_class=with_common)

    v = sub.add_parser("volumes", help="cut/ball volumes: Monte Carlo vs closed form")
    v.add_argument("--delta", type=float, nargs="+", default=[1.0])
    v.add_argument("--lam", type=float, default=1.0)
    v.add_argument("--samples", type=int, default=1 << 20)
    v.set_defaults(func=cmd_volumes)

    d = sub.add_parser("diagram", help="horizontal power diagram classification + slice SVG")
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--balls", type=str, default=None, help="JSON ball configuration file")
    d.add_argument("--samples", type=int, default=4096)
    d.add_argument("--slice-x1", type=float, default=0.25)
    d.set_defaults(func=cmd_diagram)

    t = sub.add_parser("tile", help="lattice cut family for the unit box")
    t.add_argument("--k", type=int, required=True)
    t.set_defaults(func=cmd_tile)

    b = sub.add_parser("bounds", help="closed-form gap bounds")
    b.add_argument("--k", type=int, required=True)
    b.set_defaults(func=cmd_bounds)

    o = sub.add_parser("optimize", help="anneal an n-ball covering with small gap")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--budget", type=int, default=200)
    o.add_argument("--restarts", type=int, default=1)
    o.set_defaults(func=cmd_optimize)

    a = sub.add_parser("asymptotics", help="sqrt(n) * gap sequence over lattice sizes")
    a.add_argument("--k-max", type=int, default=4)
    a.add_argument("--budget", type=int, default=200)
    a.set_defaults(func=cmd_asymptotics)

    f = sub.add_parser("fefferman", help="boundary measure integral")
    f.add_argument("--domain", choices=["ball", "siegel", "cvx", "custom-json"], default="ball")
    f.add_argument("--rho-json", type=str, default=None)
    f.add_argument("--lam", type=float, default=1.0)
    f.add_argument("--mu", type=float, nargs=2, default=[0.0, 0.0])
    f.add_argument("--nu", type=float, default=0.0)
    f.add_argument("--beta", type=float, default=0.0)
    f.add_argument("--nodes", type=int, default=24)
    f.set_defaults(func=cmd_fefferman)

    x = sub.add_parser("darboux", help="contact straightening probe report")
    x.add_argument("--lam", type=float, default=1.0)
    x.add_argument("--mu", type=float, nargs=2, default=[0.0, 1.0])
    x.add_argument("--nu", type=float, default=0.0)
    x.add_argument("--beta", type=float, default=0.0)
    x.add_argument("--radius", type=float, default=0.15)
    x.add_argument("--probe-radius", type=float, default=0.1)
    x.add_argument("--pairs", type=int, default=10)
    x.set_defaults(func=cmd_darboux)

    g = sub.add_parser("demo", help="worked model domains")
    gs = g.add_subparsers(dest="model", parser_class=with_common)
    gl = gs.add_parser("lemniscate")
    gl.add_argument("--n", type=int, nargs="+", default=[4, 8, 16, 32])
    gl.set_defaults(func=cmd_demo, model="lemniscate")
    gb = gs.add_parser("bidisc")
    gb.add_argument("--m", type=int, nargs="+", default=[2, 4, 8, 16])
    gb.set_defaults(func=cmd_demo, model="bidisc")
    g.set_defaults(func=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 2
    options = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("func", "output_dir") and not callable(v)
    }
    cfg = RunConfig(command=args.command, options=options, output_dir=args.output_dir)
    try:
        code = args.func(cfg, args)
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        cfg.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
