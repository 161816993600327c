"""Command-line driver: invariant suites, contraction runs and rotation-algebra tables.

Exit codes: 0 success, 1 invariant failure, 2 obstruction, 3 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .contract import (
    bloch_sphere_family,
    iterate_contraction,
    loop_family,
    weak_star_convergence_check,
    write_csv,
)
from .homotopy import DELTA_MAX, Obstruction, contract_in_s
from .mats import random_hermitian
from .nctorus import (
    RotationParams,
    commutative_homotopy_groups,
    homotopy_groups,
    homotopy_groups_irrational,
)
from .sampling import s_ball_circle
from .state import AlgebraShape, PureState
from .suites import DEFAULT_TOLERANCES, run_suites

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_OBSTRUCTION = 2
EXIT_CONFIG = 3

# Unitaries are written only on request once the algebra is larger than this.
ELIDE_DIM = 4
DEMOS = ("uhf", "sball", "obstruction")


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _dims(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace("x", ",").split(",") if x.strip())


_FIELDS = {
    "seed": int,
    "out_dir": str,
    "cases": int,
    "delta": float,
    "t_level": float,
    "overlap": float,
    "dim": int,
    "rank": int,
    "depth": int,
    "vertices": int,
    "grid_points": int,
    "factors": _dims,
    "demo": str,
    "p": int,
    "q": int,
    "irrational": _bool,
    "kmax": int,
    "resolve_spheres": _bool,
    "emit_unitaries": _bool,
    "workers": int,
}


@dataclass
class RunConfig:
    seed: int = 0
    out_dir: str = "out"
    cases: int = 40
    delta: float = 5e-4
    t_level: float = 0.0
    overlap: float = 0.5
    dim: int = 8
    rank: int = 4
    depth: int = 4
    vertices: int = 17
    grid_points: int = 33
    factors: tuple[int, ...] = (2, 2, 2, 2)
    demo: str = "uhf"
    p: int = 1
    q: int = 2
    irrational: bool = False
    kmax: int | None = None
    resolve_spheres: bool = False
    emit_unitaries: bool = False
    workers: int | None = None
    tolerances: dict = field(default_factory=dict)

    def validate(self, command: str) -> None:
        bad = [f"tol.{k} = {v} is not positive" for k, v in self.tolerances.items() if not v > 0]
        if self.cases < 1:
            bad.append("cases must be at least 1")
        if self.grid_points < 2:
            bad.append("grid_points must be at least 2")
        if command == "contract":
            if self.demo not in DEMOS:
                bad.append(f"demo must be one of {', '.join(DEMOS)}, got {self.demo!r}")
            if self.vertices < 1:
                bad.append("vertices must be at least 1: the family is empty")
            if self.demo == "sball":
                if not 0.0 < self.delta < DELTA_MAX:
                    bad.append(f"delta = {self.delta} must lie in (0, 1/1296)")
                if not 0.0 <= self.t_level <= 0.25:
                    bad.append("t_level must lie in [0, 1/4]")
                if not 0.0 < self.overlap < 1.0:
                    bad.append("overlap must lie in (0, 1)")
                if not 0 < self.rank < self.dim:
                    bad.append("rank must lie in (0, dim)")
            if self.demo == "uhf":
                if not self.factors or any(d < 2 for d in self.factors):
                    bad.append("factors need dimensions of at least 2")
                elif not 0 <= self.depth <= len(self.factors):
                    bad.append(f"depth must lie in [0, {len(self.factors)}]")
        if command == "rotation":
            if self.kmax is not None and self.kmax < 0:
                bad.append("kmax must be nonnegative")
            if not self.irrational:
                if self.q < 1:
                    bad.append("q must be positive")
                elif np.gcd(self.p, self.q) != 1:
                    bad.append(f"p = {self.p} and q = {self.q} are not coprime")
        if bad:
            raise ConfigError("; ".join(bad))


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out, unknown = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if key.startswith("tol."):
            if key[4:] not in DEFAULT_TOLERANCES:
                unknown.append(key)
                continue
        elif key not in _FIELDS:
            unknown.append(key)
            continue
        out[key] = value
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return out


def build_config(raw: dict) -> RunConfig:
    cfg = RunConfig()
    values, tols = {}, {}
    for key, value in raw.items():
        try:
            if key.startswith("tol."):
                tols[key[4:]] = float(value)
            elif value is not None:
                values[key] = _FIELDS[key](value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return replace(cfg, **values, tolerances=tols)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _document(command: str, cfg: RunConfig, body: dict) -> str:
    meta = {"command": command, "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    return _dump({"meta": meta, "body": body})


def _config_body(cfg: RunConfig) -> dict:
    d = {k: getattr(cfg, k) for k in _FIELDS if k not in ("out_dir", "workers")}
    d["factors"] = list(cfg.factors)
    d["tolerances"] = dict(sorted(cfg.tolerances.items()))
    return d


# ---------------------------------------------------------------------------
# verify


def cmd_verify(cfg: RunConfig) -> int:
    results = run_suites(cfg.seed, cfg.cases, cfg.tolerances)
    body = {"seed": cfg.seed, "cases": cfg.cases, "suites": [r.to_dict() for r in results]}
    body["passed"] = all(r.passed for r in results)
    out = Path(cfg.out_dir)
    _write(out, "verify_report.json", _document("verify", cfg, body))
    rows = [(r.name, r.cases, r.max_residual, r.tolerance, "pass" if r.passed else "FAIL") for r in results]
    _write(out, "verify_report.csv", write_csv(rows, ("suite", "cases", "max_residual", "tolerance", "status")))
    print(f"{'suite':<15}{'cases':>7}{'max residual':>15}{'tolerance':>12}  status")
    for name, cases, res, tol, status in rows:
        print(f"{name:<15}{cases:>7}{res:>15.3e}{tol:>12.1e}  {status}")
    return EXIT_OK if body["passed"] else EXIT_FAILURE


# ---------------------------------------------------------------------------
# contract


def _uhf(cfg: RunConfig, out: Path) -> int:
    shape = AlgebraShape(cfg.factors)
    e = np.zeros(shape.total_dim, dtype=complex)
    e[0] = 1.0
    ref = PureState(shape, e)
    fam = loop_family(shape, ref, cfg.vertices, seed=cfg.seed)
    trace = iterate_contraction(fam, ref, cfg.depth, grid=cfg.grid_points, seed=cfg.seed, workers=cfg.workers)
    rng = np.random.default_rng([cfg.seed, 1])
    obs, checks_in = {}, []
    for n in range(1, shape.num_factors + 1):
        b = shape.embed(random_hermitian(int(np.prod(cfg.factors[:n])), rng))
        obs[f"B{n}"] = b
        checks_in.append((f"B{n}", b, n))
    checks = weak_star_convergence_check(trace, fam, checks_in, cfg.tolerances.get("iteration", 1e-8))
    base_dev = float(np.abs(trace.unitaries[fam.base_vertex] - np.eye(shape.total_dim)).max())

    emit = cfg.emit_unitaries or shape.total_dim <= ELIDE_DIM
    doc = trace.to_dict(obs, include_unitaries=emit)
    doc["unitaries_elided"] = not emit
    doc["checks"] = [c.to_dict() for c in checks]
    doc["base_vertex_deviation"] = base_dev
    doc["config"] = _config_body(cfg)
    _write(out, "trace.json", _dump(doc))
    _write(out, "observables.csv", write_csv(trace.observable_rows(obs), ("vertex", "time", "observable", "value")))

    # Triangle inequality over the completed levels bounds the composed field.
    bounds = np.zeros((len(fam), cfg.depth + 2))
    for rec in trace.records:
        lb = np.full(len(fam), 2.0) if rec.norm_bounds is None else np.asarray(rec.norm_bounds)
        bounds[:, rec.level:] += lb[:, None]
    bounds = np.minimum(bounds, 2.0)
    dist = np.linalg.norm(np.eye(shape.total_dim) - trace.unitaries, 2, axis=(2, 3))
    rows = []
    for x in range(len(fam)):
        for k, t in enumerate(trace.times):
            c = float(bounds[x, trace.levels[k]])
            rows.append((x, float(t), float(dist[x, k]), c, c - float(dist[x, k])))
    _write(out, "margins.csv", write_csv(rows, ("vertex", "time", "distance", "constant", "margin")))

    ok = all(c.passed for c in checks) and base_dev <= 1e-12 and min(r[4] for r in rows) >= -1e-9
    print(f"uhf: factors={list(cfg.factors)} depth={cfg.depth} vertices={len(fam)}")
    for rec in trace.records:
        print(f"  level {rec.level} {rec.branch:<17} window=[{rec.window[0]:.4f}, {rec.window[1]:.4f}] "
              f"capture defect {rec.max_capture_defect:.2e}")
    for c in checks:
        flag = "pass" if c.passed else "FAIL"
        print(f"  {c.name} depth {c.support_depth}: tail deviation {c.max_tail_deviation:.2e} "
              f"({'guaranteed' if c.guaranteed else 'no guarantee'}) {flag}")
    print(f"  base vertex deviation {base_dev:.2e}")
    return EXIT_OK if ok else EXIT_FAILURE


def _sball(cfg: RunConfig, out: Path) -> int:
    rng = np.random.default_rng(cfg.seed)
    fam, ball = s_ball_circle(cfg.dim, cfg.rank, cfg.overlap, cfg.t_level, cfg.delta, rng, vertices=cfg.vertices)
    paths, rep = contract_in_s(fam, ball, grid=cfg.grid_points, workers=cfg.workers, seed=cfg.seed)
    pm = ball.p.matrix
    doc = {
        "format": "s-ball-contraction",
        "version": 1,
        "report": rep.to_dict(),
        "times": [float(t) for t in paths[0].times],
        "config": _config_body(cfg),
    }
    emit = cfg.emit_unitaries or cfg.dim <= ELIDE_DIM
    if emit:
        us = np.stack([p.unitaries for p in paths])
        doc["unitaries"] = {"real": us.real.tolist(), "imag": us.imag.tolist()}
    doc["unitaries_elided"] = not emit
    _write(out, "trace.json", _dump(doc))
    obs_rows, margin_rows = [], []
    bound = rep.bound
    for x, path in enumerate(paths):
        dist = np.linalg.norm(np.eye(cfg.dim) - path.unitaries, 2, axis=(1, 2))
        weight = np.linalg.norm(np.einsum("ij,tjk,k->ti", pm, path.unitaries, ball.psi), axis=1) ** 2
        for t, dd, ww in zip(path.times, dist, weight):
            obs_rows.append((x, float(t), "p_weight", float(ww)))
            margin_rows.append((x, float(t), float(dd), float(bound), float(bound - dd)))
    _write(out, "observables.csv", write_csv(obs_rows, ("vertex", "time", "observable", "value")))
    _write(out, "margins.csv", write_csv(margin_rows, ("vertex", "time", "distance", "constant", "margin")))
    tol = cfg.tolerances.get("contraction", 1e-8)
    ok = rep.min_membership_slack >= -tol and rep.margin >= -1e-6 and rep.endpoint_spread <= tol
    print(f"sball: branch={rep.branch}/{rep.sub_branch} overlap={rep.overlap:.4g} t={rep.t_level}")
    print(f"  max distance {rep.realized_max_distance:.4e} <= {rep.bound_name} = {bound:.4e}")
    print(f"  membership slack {rep.min_membership_slack:.2e}, endpoint spread {rep.endpoint_spread:.2e}")
    return EXIT_OK if ok else EXIT_FAILURE


def _obstruction(cfg: RunConfig, out: Path) -> int:
    fam = bloch_sphere_family()
    iterate_contraction(fam, fam.base_state, 1, grid=cfg.grid_points, seed=cfg.seed)
    # The sphere of M2 states is not contractible, so a finished trace is a bug.
    print("obstruction demo produced a trace; expected an obstruction", file=sys.stderr)
    return EXIT_FAILURE


def cmd_contract(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    runner = {"uhf": _uhf, "sball": _sball, "obstruction": _obstruction}[cfg.demo]
    try:
        return runner(cfg, out)
    except Obstruction as exc:
        body = {"demo": cfg.demo, "obstruction": exc.report, "config": _config_body(cfg)}
        _write(out, "obstruction.json", _document("contract", cfg, body))
        print(f"obstruction ({exc.report.get('reason')}): {exc.report.get('message')}", file=sys.stderr)
        return EXIT_OBSTRUCTION


# ---------------------------------------------------------------------------
# rotation


def cmd_rotation(cfg: RunConfig) -> int:
    if cfg.irrational:
        kmax = 4 if cfg.kmax is None else cfg.kmax
        rows = [homotopy_groups_irrational(k) for k in range(kmax + 1)]
        label = {"theta": "irrational"}
    elif cfg.q == 1:
        kmax = 4 if cfg.kmax is None else cfg.kmax
        rows = [commutative_homotopy_groups(k) for k in range(kmax + 1)]
        label = {"p": cfg.p, "q": cfg.q}
    else:
        params = RotationParams(cfg.p, cfg.q)
        kmax = 2 * cfg.q if cfg.kmax is None else cfg.kmax
        rows = [homotopy_groups(params, k, cfg.resolve_spheres) for k in range(kmax + 1)]
        label = {"p": cfg.p, "q": cfg.q}
    body = {**label, "kmax": kmax, "resolve_spheres": cfg.resolve_spheres, "rows": [r.to_dict() for r in rows]}
    out = Path(cfg.out_dir)
    _write(out, "rotation_table.json", _document("rotation", cfg, body))
    csv_rows = [(r.k, r.value, r.provenance, r.resolved or "") for r in rows]
    _write(out, "rotation_table.csv", write_csv(csv_rows, ("k", "group", "provenance", "resolved")))
    print(f"{'k':>3}  {'group':<14}{'provenance':<14}resolved")
    for k, v, prov, res in csv_rows:
        print(f"{k:>3}  {v:<14}{prov:<14}{res}")
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")

    parser = _Parser(prog="unitary-homotopy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", parents=[common], help="run every invariant suite")
    v.add_argument("--cases", type=int)
    c = sub.add_parser("contract", parents=[common], help="run a contraction demo")
    c.add_argument("--demo", choices=DEMOS)
    c.add_argument("--delta", type=float)
    c.add_argument("--t-level", dest="t_level", type=float)
    c.add_argument("--depth", type=int)
    c.add_argument("--vertices", type=int)
    c.add_argument("--emit-unitaries", dest="emit_unitaries", action="store_true", default=None)
    r = sub.add_parser("rotation", parents=[common], help="homotopy groups of rotation-algebra pure states")
    r.add_argument("-p", type=int)
    r.add_argument("-q", type=int)
    r.add_argument("--irrational", action="store_true", default=None)
    r.add_argument("--kmax", type=int)
    r.add_argument("--resolve-spheres", dest="resolve_spheres", action="store_true", default=None)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config is not None:
        try:
            raw.update(parse_config_text(args.config.read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    extra = []
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        extra.append(item)
    raw.update(parse_config_text("\n".join(extra)))
    for key in _FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = build_config(raw)
    cfg.validate(args.command)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        command = {"verify": cmd_verify, "contract": cmd_contract, "rotation": cmd_rotation}[args.command]
        return command(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
