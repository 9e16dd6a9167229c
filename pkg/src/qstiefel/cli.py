"""Command-line interface.

Subcommands:

    build     build generator rows, optionally writing a bundle
    check     verify the nine relation families on a build or bundle
    classify  run the extraction tower and report (a, t)
    atlas     survey every admissible tuple at the configured size

Configuration comes from --config (flat key=value lines or one JSON
object) plus override flags --q --n --m --cutoff --margin.  Reports
are deterministic JSON, written to --out or stdout.

Exit codes: 0 success, 1 a verification ran and failed, 2 bad
configuration, 3 file I/O problems, 4 classification failures,
5 cutoff too small.  QSTIEFEL_THREADS caps atlas worker threads
(default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .bundle import read_bundle, write_bundle
from .errors import (
    BundleFormatError,
    ClassificationError,
    ConfigError,
    TruncationError,
)
from .fock import Window
from .qgroup import admissible_tuples, weyl_word
from .report import phase_to_turns, render, turns_distance, turns_to_phase
from .sphere import check_sphere_relations
from .stiefel import (
    StiefelGenerators,
    StiefelParams,
    build_generators,
    check_relations,
    classify,
    predicted_columns,
    rank_sequence,
    row_sphere_tuple,
)

__all__ = ["main", "RunConfig"]

REDUCTION_TOL = 1e-12


@dataclass
class RunConfig:
    n: int = 3
    m: int = 1
    q: float = 0.5
    cutoff: int = 12
    margin: int = 2
    tol_relation: float = 1e-10
    tol_eig: float = 1e-8
    a: tuple[int, ...] | None = None
    t_turns: tuple[float, ...] | None = None

    def validate(self) -> None:
        if not 2 <= self.n <= 8:
            raise ConfigError(f"n must be in 2..8, got {self.n}")
        if not 1 <= self.m <= self.n - 1:
            raise ConfigError(f"m must be in 1..{self.n - 1}, got {self.m}")
        if not 0.0 < self.q < 1.0:
            raise ConfigError(f"q must satisfy 0 < q < 1, got {self.q}")
        if self.cutoff < 4:
            raise ConfigError(f"cutoff must be >= 4, got {self.cutoff}")
        if not 0 <= self.margin < self.cutoff / 2:
            raise ConfigError(
                f"margin must be in 0..{(self.cutoff - 1) // 2} for cutoff "
                f"{self.cutoff}, got {self.margin}"
            )
        for tol, name in ((self.tol_relation, "tol_relation"), (self.tol_eig, "tol_eig")):
            if not tol > 0.0:
                raise ConfigError(f"{name} must be positive, got {tol}")
        if self.a is not None:
            if len(self.a) != self.m:
                raise ConfigError(f"a must have length m = {self.m}, got {len(self.a)}")
            for j, aj in enumerate(self.a, start=1):
                if not 1 <= aj <= self.n - j + 1:
                    raise ConfigError(
                        f"a_{j} must lie in 1..{self.n - j + 1}, got {aj}"
                    )
        if self.t_turns is not None and len(self.t_turns) != self.m:
            raise ConfigError(
                f"t must have length m = {self.m}, got {len(self.t_turns)}"
            )


_INT_KEYS = {"n", "m", "cutoff", "margin"}
_FLOAT_KEYS = {"q", "tol_relation", "tol_eig"}
_ALIASES = {"d": "cutoff", "t": "t_turns"}


def _parse_list(raw, caster, key):
    if isinstance(raw, str):
        parts = [p for p in raw.replace(" ", "").split(",") if p]
    elif isinstance(raw, (list, tuple)):
        parts = list(raw)
    else:
        raise ConfigError(f"config key {key!r} needs a list, got {raw!r}")
    try:
        return tuple(caster(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def _coerce(key: str, raw) -> tuple[str, object]:
    key = _ALIASES.get(key.lower(), key.lower())
    try:
        if key in _INT_KEYS:
            return key, int(raw)
        if key in _FLOAT_KEYS:
            return key, float(raw)
        if key == "a":
            return key, _parse_list(raw, int, key)
        if key == "t_turns":
            return key, _parse_list(raw, float, key)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from exc
    raise ConfigError(f"unknown config key {key!r}")


def load_config(path) -> dict:
    """Parse a config file: flat key=value lines or one JSON object."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    fields: dict[str, object] = {}
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top-level JSON must be an object")
        items = data.items()
    else:
        items = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, val = line.split("=", 1)
            items.append((key.strip(), val.strip()))
    for key, raw in items:
        k, v = _coerce(key, raw)
        fields[k] = v
    return fields


def _make_config(args) -> RunConfig:
    fields: dict[str, object] = {}
    if getattr(args, "config", None):
        fields = load_config(args.config)
    for key in ("q", "n", "m", "cutoff", "margin"):
        val = getattr(args, key, None)
        if val is not None:
            fields[key] = val
    cfg = RunConfig(**fields)
    cfg.validate()
    return cfg


def _config_dict(cfg: RunConfig) -> dict:
    return {
        "n": cfg.n,
        "m": cfg.m,
        "q": cfg.q,
        "cutoff": cfg.cutoff,
        "margin": cfg.margin,
        "tol_relation": cfg.tol_relation,
        "tol_eig": cfg.tol_eig,
        "a": list(cfg.a) if cfg.a is not None else None,
        "t_turns": list(cfg.t_turns) if cfg.t_turns is not None else None,
    }


def _params_from(cfg: RunConfig) -> StiefelParams:
    if cfg.a is None:
        raise ConfigError("building needs the index tuple a (config key 'a')")
    turns = cfg.t_turns if cfg.t_turns is not None else (0.0,) * cfg.m
    t = tuple(turns_to_phase(x) for x in turns)
    return StiefelParams(cfg.n, cfg.m, cfg.q, cfg.a, t)


def _load_gens(args, cfg: RunConfig) -> tuple[StiefelGenerators, str]:
    bundle = getattr(args, "bundle", None)
    if bundle:
        return read_bundle(bundle), str(bundle)
    return build_generators(_params_from(cfg), cfg.cutoff), "config"


def _emit(reportable: dict, out) -> None:
    text = render(reportable)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    raw = os.environ.get("QSTIEFEL_THREADS")
    if raw is None:
        return 1
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"QSTIEFEL_THREADS must be an integer, got {raw!r}") from None
    if v < 1:
        raise ConfigError(f"QSTIEFEL_THREADS must be >= 1, got {v}")
    return v


def _relations_section(rel) -> dict:
    counts: dict[str, int] = {}
    for r in rel.instances:
        fam = r.name.split("[", 1)[0]
        counts[fam] = counts.get(fam, 0) + 1
    fams = rel.families()
    worst = rel.worst
    return {
        "families": {
            name: {"count": counts[name], "max_residual": fams[name]} for name in fams
        },
        "margin": rel.margin,
        "tol": rel.tol,
        "max_residual": rel.max_residual,
        "worst": worst.name if worst is not None else None,
        "passed": rel.passed(),
    }


def _reduction_section(gens: StiefelGenerators, rel, window: Window, tol: float) -> dict:
    n = gens.n
    srel = check_sphere_relations(row_sphere_tuple(gens), window, tol)
    by_c = {r.name: r for r in rel.instances}
    by_s = {r.name: r for r in srel.instances}
    pairs: list[tuple[str, str]] = []
    for k in range(1, n + 1):
        for l in range(k + 1, n + 1):
            pairs.append((f"c2[i={n},k={k},l={l}]", f"swap[i={n - k + 1},j={n - l + 1}]"))
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            if k != l:
                pairs.append(
                    (f"c6[i={n},k={k},l={l}]", f"adjoint_swap[i={n - k + 1},j={n - l + 1}]")
                )
    for k in range(1, n + 1):
        pairs.append((f"c8[i={n},k={k}]", f"defect[i={n - k + 1}]"))
    pairs.append((f"c9[i={n},j={n}]", "sphere_sum"))
    worst = 0.0
    for cn, sn in pairs:
        worst = max(worst, abs(by_c[cn].in_window - by_s[sn].in_window))
    return {
        "pairs": len(pairs),
        "max_disagreement": worst,
        "sphere_max_residual": srel.max_residual,
        "tol": REDUCTION_TOL,
        "passed": worst <= REDUCTION_TOL,
    }


def cmd_build(args, cfg: RunConfig) -> int:
    params = _params_from(cfg)
    gens = build_generators(params, cfg.cutoff)
    if args.bundle:
        write_bundle(gens, args.bundle)
    word = weyl_word(params.a, params.n)
    out = {
        "command": "build",
        "config": _config_dict(cfg),
        "bundle": str(args.bundle) if args.bundle else None,
        "shape": list(gens.shape.dims),
        "word": word,
        "word_length": len(word),
        "ranks": list(rank_sequence(params.n, params.m, params.a)),
        "columns": list(predicted_columns(params.n, params.m, params.a)),
        "verdict": "pass",
    }
    _emit(out, args.out)
    return 0


def cmd_check(args, cfg: RunConfig) -> int:
    gens, source = _load_gens(args, cfg)
    window = Window(cfg.margin)
    rel = check_relations(gens, window, cfg.tol_relation)
    out = {
        "command": "check",
        "config": _config_dict(cfg),
        "source": source,
        "relations": _relations_section(rel),
    }
    ok = rel.passed()
    if gens.m == 1:
        red = _reduction_section(gens, rel, window, cfg.tol_relation)
        out["reduction"] = red
        ok = ok and red["passed"]
    out["verdict"] = "pass" if ok else "fail"
    _emit(out, args.out)
    return 0 if ok else 1


def cmd_classify(args, cfg: RunConfig) -> int:
    gens, source = _load_gens(args, cfg)
    window = Window(cfg.margin)
    cls = classify(gens, window, tol_rel=cfg.tol_relation, tol_eig=cfg.tol_eig)
    tower_rows = []
    for lv in cls.tower.levels:
        tower_rows.append(
            {
                "level": lv.level,
                "row": lv.row,
                "rank": lv.rank,
                "column": lv.column,
                "angle_turns": phase_to_turns(lv.angle),
                "dim": lv.ops.shape.total,
                "dim_next": lv.basis.dim,
                "sphere_max_residual": lv.sphere_report.max_residual
                if lv.sphere_report is not None
                else None,
                "spectrum": {
                    "conforms": lv.spectrum.conforms,
                    "below_floor": lv.spectrum.below_floor,
                    "floor": lv.spectrum.floor,
                    "worst_off_lattice": lv.spectrum.worst_off_lattice,
                },
            }
        )
    out = {
        "command": "classify",
        "config": _config_dict(cfg),
        "source": source,
        "torus_convention": "level-index",
        "tower": tower_rows,
        "classification": {
            "a": list(cls.a),
            "t_turns": [phase_to_turns(z) for z in cls.t],
            "multiplicity": cls.multiplicity,
            "irreducible": cls.irreducible,
        },
    }
    ok = True
    if gens.meta is not None:
        gap = max(
            (
                turns_distance(phase_to_turns(x), phase_to_turns(y))
                for x, y in zip(gens.meta.t, cls.t)
            ),
            default=0.0,
        )
        match = {
            "a_declared": list(gens.meta.a),
            "a_match": tuple(gens.meta.a) == cls.a,
            "t_max_gap_turns": gap,
            "passed": tuple(gens.meta.a) == cls.a and gap <= 1e-8,
        }
        out["match"] = match
        ok = match["passed"]
    out["verdict"] = "pass" if ok else "fail"
    _emit(out, args.out)
    return 0 if ok else 1


def _atlas_row(cfg: RunConfig, a: tuple[int, ...]) -> dict:
    turns = cfg.t_turns if cfg.t_turns is not None else (0.0,) * cfg.m
    t = tuple(turns_to_phase(x) for x in turns)
    params = StiefelParams(cfg.n, cfg.m, cfg.q, a, t)
    gens = build_generators(params, cfg.cutoff)
    window = Window(cfg.margin)
    rel = check_relations(gens, window, cfg.tol_relation)
    cls = classify(gens, window, tol_rel=cfg.tol_relation, tol_eig=cfg.tol_eig)
    word = weyl_word(a, cfg.n)
    return {
        "a": list(a),
        "word": word,
        "word_length": len(word),
        "ranks": list(rank_sequence(cfg.n, cfg.m, a)),
        "columns": list(predicted_columns(cfg.n, cfg.m, a)),
        "max_residual": rel.max_residual,
        "relations_pass": rel.passed(),
        "recovered_a": list(cls.a),
        "a_match": cls.a == a,
        "t_turns": [phase_to_turns(z) for z in cls.t],
        "multiplicity": cls.multiplicity,
    }


def cmd_atlas(args, cfg: RunConfig) -> int:
    tuples = admissible_tuples(cfg.n, cfg.m)
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _atlas_row(cfg, a), tuples))
    else:
        rows = [_atlas_row(cfg, a) for a in tuples]
    ok = all(r["relations_pass"] and r["a_match"] for r in rows)
    out = {
        "command": "atlas",
        "config": _config_dict(cfg),
        "count": len(rows),
        "table": rows,
        "verdict": "pass" if ok else "fail",
    }
    _emit(out, args.out)
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qstiefel",
        description="Quantum Stiefel representations on truncated Fock spaces.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value or JSON config file")
    common.add_argument("--q", type=float, default=None, help="deformation parameter")
    common.add_argument("--n", type=int, default=None, help="matrix size")
    common.add_argument("--m", type=int, default=None, help="number of generator rows")
    common.add_argument("--cutoff", type=int, default=None, help="Fock cutoff per factor")
    common.add_argument("--margin", type=int, default=None, help="window margin")
    common.add_argument("--out", default=None, help="report file (stdout if omitted)")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="build generator rows")
    b.add_argument("--bundle", default=None, help="write the rows to this bundle file")
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", parents=[common], help="verify the relation families")
    c.add_argument("--bundle", default=None, help="read rows from this bundle instead of building")
    c.set_defaults(func=cmd_check)

    y = sub.add_parser("classify", parents=[common], help="recover (a, t) by the tower")
    y.add_argument("--bundle", default=None, help="read rows from this bundle instead of building")
    y.set_defaults(func=cmd_classify)

    t = sub.add_parser("atlas", parents=[common], help="survey all admissible tuples")
    t.set_defaults(func=cmd_atlas)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _make_config(args)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BundleFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except ClassificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
