"""Command-line front end.

Exit codes: 0 ok, 2 input error, 3 numerical-consistency failure (including
any failed internal check).  JSON goes to stdout, artifacts to ``--out``.
"""

import argparse
from dataclasses import dataclass, replace
import json
import math
import os
import sys

import numpy as np

from .bodies import read_body
from .cases import CASES
from .errors import (AreaMetricError, BodyParseError, BoundaryShapeError, GridMismatchError,
                     InvalidDimensionError, NumericalConsistencyError)
from .forms import center, form_report, is_interior, v2
from .hyperbolic import BOUNDARY_THRESH, dist_fields
from .shape import dist_shape, geodesic_endpoints
from .sphere import SphereGrid, build_grid, circle_grid, combine, field_from_values, sample_body
from .validity import is_support_function, terminal_extension

MODELS = ("hyperboloid", "crossratio", "klein")
MODEL_AGREEMENT = 1e-9


class CheckFailed(NumericalConsistencyError):
    pass


@dataclass(frozen=True)
class RunConfig:
    grid_resolution: int = None
    tolerance: float = None
    seed: int = 0
    allow_boundary: bool = False
    output_dir: str = None

    def __post_init__(self):
        if self.grid_resolution is not None and self.grid_resolution < 8:
            raise ValueError("grid resolution must be >= 8")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def grid(self, n):
        return build_grid(n, self.grid_resolution)


CONFIG_KEYS = {"grid_n": ("grid_resolution", int), "tol": ("tolerance", float),
               "seed": ("seed", int), "allow_boundary": ("allow_boundary", "bool"),
               "out": ("output_dir", str)}


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            name, kind = CONFIG_KEYS[key]
            try:
                values[name] = _parse_bool(val) if kind == "bool" else kind(val)
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
    return values


def build_config(args):
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = replace(cfg, **read_config(args.config))
    flags = {"grid_n": "grid_resolution", "tol": "tolerance", "seed": "seed",
             "allow_boundary": "allow_boundary", "out": "output_dir"}
    over = {name: getattr(args, key) for key, name in flags.items()
            if getattr(args, key, None) is not None}
    return replace(cfg, **over)


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _load(path, cfg, n=None):
    body = read_body(path)
    if n is not None and body.dim != n:
        raise InvalidDimensionError(f"{path}: dimension {body.dim}, expected {n}")
    return body, sample_body(body, cfg.grid(body.dim))


def _out_dir(cfg):
    d = cfg.output_dir or "."
    try:
        os.makedirs(d, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {d}: {e.strerror}") from None
    return d


def _write(path, text):
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from None
    return path


# ------------------------------------------------------------ commands


def cmd_volumes(args, cfg):
    body, f = _load(args.body, cfg)
    rep = form_report(f).to_dict()
    rep["dim"] = body.dim
    return rep


def cmd_dist(args, cfg):
    a, f = _load(args.a, cfg)
    b, g = _load(args.b, cfg, a.dim)
    interior = is_interior(center(f), BOUNDARY_THRESH) and is_interior(center(g), BOUNDARY_THRESH)
    if not interior:
        if not cfg.allow_boundary:
            raise BoundaryShapeError("a body is a point or a segment; pass --allow-boundary")
        return {"distance": None, "boundary": True,
                "note": "segments and points lie at infinite distance"}
    if args.shape:
        return dist_shape(f, g).to_dict()
    models = {m: dist_fields(f, g, m) for m in MODELS}
    spread = max(models.values()) - min(models.values())
    if spread > MODEL_AGREEMENT:
        raise CheckFailed(f"distance models disagree by {spread:.3g}")
    return {"distance": models[args.model], "model": args.model, "models": models}


def _svg(points, t):
    pts = " ".join(f"{x:.6f},{-y:.6f}" for x, y in points)
    return ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="-2 -2 4 4" width="400" height="400">\n'
            f'  <title>t = {t:.6g}</title>\n'
            f'  <polygon points="{pts}" fill="none" stroke="black" stroke-width="0.01"/>\n'
            '</svg>\n')


def cmd_geodesic(args, cfg):
    if args.steps < 1:
        raise ValueError("--steps must be >= 1")
    a, f = _load(args.a, cfg)
    b, g = _load(args.b, cfg, a.dim)
    h1, h2 = geodesic_endpoints(f, g, allow_boundary=cfg.allow_boundary)
    boundary = not (is_interior(h1, BOUNDARY_THRESH) and is_interior(h2, BOUNDARY_THRESH))
    out = _out_dir(cfg)
    grid = f.grid
    rows = ["t,theta,h"] if grid.n == 2 else ["t,polar,azimuth,h"]
    frames, areas = [], []
    for k in range(args.steps + 1):
        t = k / args.steps
        h = combine([1 - t, t], [h1, h2])
        areas.append(v2(h))
        if grid.n == 2:
            for th, val in zip(grid.theta, h.values):
                rows.append(f"{t:.17g},{th:.17g},{val:.17g}")
            s = v2(h)
            hn = h.scaled(1 / math.sqrt(s)) if s > 0 else h
            P = hn.values[:, None] * grid.nodes + hn.gradients
            frames.append(_write(os.path.join(out, f"frame_{k}.svg"), _svg(P, t)))
        else:
            X = grid.nodes
            polar = np.arccos(np.clip(X[:, 2], -1, 1))
            azim = np.mod(np.arctan2(X[:, 1], X[:, 0]), 2 * np.pi)
            for p, q, val in zip(polar, azim, h.values):
                rows.append(f"{t:.17g},{p:.17g},{q:.17g},{val:.17g}")
    csv = _write(os.path.join(out, "geodesic.csv"), "\n".join(rows) + "\n")
    rep = {"steps": args.steps, "csv": csv, "frames": frames, "v2": areas, "boundary": boundary}
    if not boundary:
        rep["distance"] = dist_fields(h1, h2)
    return rep


def cmd_paper_examples(args, cfg):
    fn = CASES[args.case]
    kw = {}
    if args.case in ("isoperimetric", "embed"):
        kw["seed"] = cfg.seed
    if args.case in ("nonunique", "isoperimetric", "terminal", "embed"):
        kw["grid"] = cfg.grid(2)
    if args.case == "terminal" and cfg.tolerance is not None:
        kw["tol"] = cfg.tolerance
    rep = fn(**kw)
    rep["case"] = args.case
    rep["pass"] = all(c["pass"] for c in rep["checks"])
    return rep


def _read_field_csv(path, cfg):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = lines[0].split(",")
    try:
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    except ValueError as e:
        raise BodyParseError(f"{path}: {e}") from None
    if header[:2] == ["theta", "value"]:
        grid = circle_grid(len(data))
        if not np.allclose(data[:, 0], grid.theta, atol=1e-9):
            raise BodyParseError(f"{path}: theta column is not a uniform grid from 0")
        grads = None
        if len(header) > 2 and np.all(np.isfinite(data[:, 2])):
            T = np.stack([-grid.nodes[:, 1], grid.nodes[:, 0]], axis=1)
            grads = data[:, 2:3] * T
        return field_from_values(grid, data[:, 1], grads)
    if header[:4] == ["polar", "azimuth", "weight", "value"]:
        p, q = data[:, 0], data[:, 1]
        X = np.stack([np.sin(p) * np.cos(q), np.sin(p) * np.sin(q), np.cos(p)], axis=1)
        grid = SphereGrid(3, X, data[:, 2], len(data), 0, 0.0, None, ("csv", path))
        grads = data[:, 4:7] if data.shape[1] >= 7 and np.all(np.isfinite(data[:, 4:7])) else None
        return field_from_values(grid, data[:, 3], grads)
    raise BodyParseError(f"{path}: unrecognized CSV header {lines[0]!r}")


def cmd_validate(args, cfg):
    if args.input.endswith(".csv"):
        f = _read_field_csv(args.input, cfg)
    else:
        _, f = _load(args.input, cfg)
    return is_support_function(f, cfg.tolerance).to_dict()


def cmd_terminal(args, cfg):
    a, f = _load(args.a, cfg)
    b, g = _load(args.b, cfg, a.dim)
    return terminal_extension(f, g, tol=cfg.tolerance, allow_boundary=cfg.allow_boundary).to_dict()


# ------------------------------------------------------------ entry point


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="flat key = value config file")
    common.add_argument("--grid-n", dest="grid_n", type=int, default=argparse.SUPPRESS,
                        help="grid resolution (S^1 nodes, or polar rings on S^2)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--allow-boundary", dest="allow_boundary", action="store_true",
                        default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="artifact directory")
    p = argparse.ArgumentParser(prog="areametric", parents=[common],
                                description="Intrinsic-area metric on convex shapes")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("volumes", parents=[common], help="V1, V2, mean, Steiner point")
    s.add_argument("body")
    s = sub.add_parser("dist", parents=[common], help="oriented or shape distance")
    s.add_argument("a")
    s.add_argument("b")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--oriented", action="store_true")
    mode.add_argument("--shape", action="store_true")
    s.add_argument("--model", choices=MODELS, default="hyperboloid")
    s = sub.add_parser("geodesic", parents=[common], help="CSV and SVG frames along a geodesic")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--steps", type=int, default=4)
    s = sub.add_parser("paper-examples", parents=[common], help="worked cases with checks")
    s.add_argument("--case", choices=sorted(CASES), required=True)
    s = sub.add_parser("validate", parents=[common], help="support-function test")
    s.add_argument("input", help="body JSON or field CSV")
    s = sub.add_parser("terminal", parents=[common], help="terminal-point probe")
    s.add_argument("a")
    s.add_argument("b")
    return p


COMMANDS = {"volumes": cmd_volumes, "dist": cmd_dist, "geodesic": cmd_geodesic,
            "paper-examples": cmd_paper_examples, "validate": cmd_validate,
            "terminal": cmd_terminal}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        rep = COMMANDS[args.command](args, cfg)
    except NumericalConsistencyError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (AreaMetricError, GridMismatchError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(_dump(rep))
    if isinstance(rep, dict) and rep.get("pass") is False:
        print("error: internal check failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
