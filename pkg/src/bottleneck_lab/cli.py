"""Command-line front end.

Subcommands build states, trace bottleneck/funnel curves and the
rate-region boundary, run the verification suites, and export results
as CSV, JSON, or SVG, each run accompanied by a manifest.

Exit codes: 0 success, 2 invalid input or unwritable output,
3 infeasible target, 4 failed verification suite, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import dataclass, fields as dc_fields, replace
from typing import Optional

import numpy as np

from . import __version__, sources
from .classical_ib import (
    classical_ib_curve,
    classical_pf_curve,
    shannon_entropy,
    shannon_mutual_information,
    validate_joint_table,
)
from .curves import Curve, SolverConfig, _jsonable
from .errors import InfeasibleError, ValidationError
from .rate_region import RegionBoundary, wak_boundary
from .solver import (
    _default_quantum_config,
    dimension_study,
    normalize_curve,
    quantum_ib_curve,
    quantum_pf_curve,
)
from .states import (
    DensityOperator,
    embed_classical_joint,
    mutual_information,
    partial_trace,
    von_neumann_entropy,
)
from .verify import run_suite

__all__ = ["RunManifest", "StateSpec", "export_artifacts", "main", "run_command"]

_BUILTIN_KINDS = ("rho3", "bsc", "pure2q", "classical-joint", "random")

_QUANTUM_ONLY = ("rho3", "pure2q", "random")


# ---------------------------------------------------------------------------
# state specifications


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_params(raw: str) -> dict:
    params = {}
    for item in filter(None, (part.strip() for part in raw.split(","))):
        if "=" not in item:
            raise ValidationError(f"state parameter {item!r} is not key=value")
        key, value = item.split("=", 1)
        params[key.strip()] = _parse_scalar(value.strip())
    return params


def _take(params: dict, allowed: tuple, kind: str) -> None:
    extra = sorted(set(params) - set(allowed))
    if extra:
        raise ValidationError(
            f"{kind} does not take {extra}; allowed parameters: {sorted(allowed)}"
        )


def _parse_table_text(text: str) -> np.ndarray:
    # rows split on ';', entries on whitespace: "0.4 0.1;0.1 0.4"
    try:
        rows = [[float(tok) for tok in row.split()] for row in str(text).split(";")]
    except ValueError as err:
        raise ValidationError(f"cannot parse table {text!r}: {err}")
    if not rows or any(len(r) != len(rows[0]) for r in rows) or not rows[0]:
        raise ValidationError(f"table {text!r} is not rectangular")
    return np.array(rows, dtype=float)


def _load_state_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as err:
        raise ValidationError(f"cannot read state file {path}: {err}")
    except json.JSONDecodeError as err:
        raise ValidationError(f"state file {path} is not valid JSON: {err}")
    if not isinstance(payload, dict):
        raise ValidationError(f"state file {path} must hold a JSON object")
    return payload


def _matrix_from_pairs(entries, path: str) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise ValidationError(
            f"state file {path}: matrix must be square with [re, im] entries, "
            f"got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True)
class StateSpec:
    """Parsed --state argument: a builtin recipe or a JSON state file.

    Builtins: rho3:p=0.4 | bsc:delta=0.1,p0=0.5 | pure2q:seed=3 |
    classical-joint:seed=1,nx=2,ny=2 (or table=0.4 0.1;0.1 0.4) |
    random:seed=1,dx=2,dy=2.  Anything else is treated as a path to a
    JSON file holding either {dims, labels, matrix} with [re, im]
    entries, or {table} with a classical joint distribution.
    """

    kind: str
    params: dict

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        text = str(text).strip()
        if not text:
            raise ValidationError("--state must not be empty")
        head = text.split(":", 1)[0]
        if head in _BUILTIN_KINDS:
            raw = text.split(":", 1)[1] if ":" in text else ""
            return cls(head, _parse_params(raw))
        if os.path.exists(text) or text.endswith(".json"):
            return cls("file", {"path": text})
        raise ValidationError(
            f"unknown state {text!r}: not one of the builtins "
            f"({', '.join(_BUILTIN_KINDS)}) and not an existing file"
        )

    def describe(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(dict(self.params))}

    def table(self) -> np.ndarray:
        """The classical joint distribution, when this spec has one."""
        if self.kind == "bsc":
            _take(self.params, ("delta", "p0"), "bsc")
            if "delta" not in self.params:
                raise ValidationError("bsc needs delta=<crossover probability>")
            return sources.bsc_table(
                float(self.params["delta"]), float(self.params.get("p0", 0.5))
            )
        if self.kind == "classical-joint":
            _take(self.params, ("table", "seed", "nx", "ny"), "classical-joint")
            if "table" in self.params:
                return validate_joint_table(_parse_table_text(self.params["table"]))
            shape = (int(self.params.get("nx", 2)), int(self.params.get("ny", 2)))
            return sources.random_classical_table(int(self.params.get("seed", 0)), shape)
        if self.kind == "file":
            payload = _load_state_file(self.params["path"])
            if "table" in payload:
                return validate_joint_table(np.asarray(payload["table"], dtype=float))
            raise ValidationError(
                f"state file {self.params['path']} holds a density matrix; "
                "the classical solvers need a joint table"
            )
        raise ValidationError(
            f"{self.kind} is a quantum state; drop --classical or pick a classical source"
        )

    def density(self) -> DensityOperator:
        """The state as a density operator (classical sources get embedded)."""
        if self.kind == "rho3":
            _take(self.params, ("p",), "rho3")
            return sources.rho3(float(self.params.get("p", 0.4)))
        if self.kind == "pure2q":
            _take(self.params, ("seed",), "pure2q")
            return sources.random_pure2q(int(self.params.get("seed", 0))).to_density()
        if self.kind == "random":
            _take(self.params, ("seed", "dx", "dy"), "random")
            dims = (int(self.params.get("dx", 2)), int(self.params.get("dy", 2)))
            return sources.random_density(int(self.params.get("seed", 0)), dims)
        if self.kind in ("bsc", "classical-joint"):
            return embed_classical_joint(self.table())
        payload = _load_state_file(self.params["path"])
        if "table" in payload:
            return embed_classical_joint(
                validate_joint_table(np.asarray(payload["table"], dtype=float))
            )
        missing = [k for k in ("dims", "labels", "matrix") if k not in payload]
        if missing:
            raise ValidationError(
                f"state file {self.params['path']} is missing {missing}"
            )
        mat = _matrix_from_pairs(payload["matrix"], self.params["path"])
        dims = tuple(int(d) for d in payload["dims"])
        labels = tuple(str(s) for s in payload["labels"])
        return DensityOperator(mat, dims, labels)

    def state_payload(self) -> dict:
        """JSON document for the `state` subcommand (re-loadable via --state)."""
        if self.kind in ("bsc", "classical-joint"):
            return {"table": _jsonable(self.table())}
        if self.kind == "file":
            payload = _load_state_file(self.params["path"])
            if "table" in payload:
                return {"table": _jsonable(validate_joint_table(
                    np.asarray(payload["table"], dtype=float)))}
        rho = self.density()
        pairs = np.stack([rho.matrix.real, rho.matrix.imag], axis=-1)
        return {
            "dims": [int(d) for d in rho.dims],
            "labels": list(rho.labels),
            "matrix": _jsonable(pairs),
        }


def _require_xy(rho: DensityOperator) -> None:
    if "X" not in rho.labels or "Y" not in rho.labels:
        raise ValidationError(
            f"the curve solvers need subsystems labeled X and Y, got {list(rho.labels)}"
        )


# ---------------------------------------------------------------------------
# run manifests


@dataclass(frozen=True)
class RunManifest:
    """Record of one command: arguments, configuration, and output digests."""

    command: tuple
    config: dict
    seed: Optional[int]
    version: str
    wall_time_s: float
    outputs: tuple  # of {"path", "sha256", "bytes"} dicts

    def to_dict(self) -> dict:
        return {
            "command": list(self.command),
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "wall_time_s": self.wall_time_s,
            "outputs": [dict(entry) for entry in self.outputs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunManifest":
        return cls(
            command=tuple(str(a) for a in data["command"]),
            config=dict(data["config"]),
            seed=None if data["seed"] is None else int(data["seed"]),
            version=str(data["version"]),
            wall_time_s=float(data["wall_time_s"]),
            outputs=tuple(dict(entry) for entry in data["outputs"]),
        )


# ---------------------------------------------------------------------------
# artifact export


@dataclass(frozen=True)
class _Views:
    payload: dict
    rows: Optional[list]
    columns: Optional[tuple]
    plot: Optional[dict]


def _witness_payload(point) -> dict:
    if hasattr(point, "witness_params"):
        return {
            "params": _jsonable(point.witness_params),
            "d_w": int(point.witness_d_w),
            "d_v": int(point.witness_d_v),
        }
    witness = point.witness
    if hasattr(witness, "rows"):
        return {"rows": _jsonable(witness.rows)}
    return {"value": _jsonable(witness)}


_AXIS_LABELS = {
    "quantum-ib": ("bottleneck target I(Y;W) [bits]", "leak I(YR;W) [bits]"),
    "quantum-ib-normalized": ("a", "R̄_q"),
    "classical-ib": ("relevance target I(W;Y) [bits]", "rate I(W;X) [bits]"),
    "classical-ib-normalized": ("a", "R̄"),
    "quantum-pf": ("disclosure floor t [bits]", "G(t) [bits]"),
    "quantum-pf-dual": ("relevance cap I(Y;W) [bits]", "max leak I(YR;W) [bits]"),
    "quantum-pf-dual-normalized": ("a", "P̄_q"),
    "classical-pf": ("disclosure floor t [bits]", "G(t) [bits]"),
}


def _curve_views(curve: Curve) -> _Views:
    kind = str(curve.meta.get("kind", "curve"))
    rows = [
        {
            "abscissa": float(p.abscissa),
            "value": float(p.value),
            "achieved_constraint": float(p.achieved_constraint),
            "converged": bool(p.converged),
        }
        for p in curve.points
    ]
    payload = {
        "kind": kind,
        "meta": _jsonable(curve.meta),
        "points": [
            dict(row, witness=_witness_payload(p))
            for row, p in zip(rows, curve.points)
        ],
    }
    xlabel, ylabel = _AXIS_LABELS.get(kind, ("abscissa", "value"))
    plot = {
        "series": [
            {
                "label": kind,
                "xs": [r["abscissa"] for r in rows],
                "ys": [r["value"] for r in rows],
            }
        ],
        "xlabel": xlabel,
        "ylabel": ylabel,
        "title": kind,
    }
    return _Views(payload, rows, ("abscissa", "value", "achieved_constraint", "converged"), plot)


def _region_views(boundary: RegionBoundary) -> _Views:
    rows = [
        {
            "q_x": float(pt.q_x),
            "q_y": float(pt.q_y),
            "achieved_constraint": float(w.achieved_constraint),
            "converged": bool(w.converged),
        }
        for pt, w in zip(boundary.points, boundary.witnesses)
    ]
    payload = {
        "kind": str(boundary.meta.get("kind", "wak-boundary")),
        "meta": _jsonable(boundary.meta),
        "points": [{"q_x": r["q_x"], "q_y": r["q_y"]} for r in rows],
        "witnesses": [
            dict(_witness_payload(w),
                 abscissa=float(w.abscissa),
                 value=float(w.value),
                 achieved_constraint=float(w.achieved_constraint),
                 converged=bool(w.converged))
            for w in boundary.witnesses
        ],
    }
    plot = {
        "series": [
            {"label": "boundary", "xs": [r["q_x"] for r in rows], "ys": [r["q_y"] for r in rows]}
        ],
        "xlabel": "helper rate Q_X [qubits]",
        "ylabel": "primary rate Q_Y [qubits]",
        "title": payload["kind"],
    }
    return _Views(payload, rows, ("q_x", "q_y", "achieved_constraint", "converged"), plot)


def _study_views(curves) -> _Views:
    curves = list(curves)
    if not curves or not all(isinstance(c, Curve) for c in curves):
        raise ValidationError("expected a non-empty sequence of curves")
    rows = []
    series = []
    for curve in curves:
        single = _curve_views(curve)
        d_w = int(curve.meta.get("d_w", 0))
        rows.extend(dict(r, d_w=d_w) for r in single.rows)
        series.append(dict(single.plot["series"][0], label=f"d_W={d_w}"))
    payload = {"kind": "dimension-study", "curves": [_curve_views(c).payload for c in curves]}
    base = _AXIS_LABELS.get(str(curves[0].meta.get("kind", "")), ("abscissa", "value"))
    plot = {"series": series, "xlabel": base[0], "ylabel": base[1], "title": "dimension-study"}
    return _Views(
        payload,
        rows,
        ("d_w", "abscissa", "value", "achieved_constraint", "converged"),
        plot,
    )


def _views_of(obj) -> _Views:
    if isinstance(obj, Curve):
        return _curve_views(obj)
    if isinstance(obj, RegionBoundary):
        return _region_views(obj)
    if isinstance(obj, (list, tuple)):
        return _study_views(obj)
    if isinstance(obj, dict):
        rows = obj.get("_rows")
        columns = obj.get("_columns")
        payload = {k: v for k, v in obj.items() if not k.startswith("_")}
        return _Views(payload, rows, columns, None)
    raise ValidationError(f"cannot export objects of type {type(obj).__name__}")


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _csv_text(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[col]) for col in columns])
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


_PALETTE = ("#1f6fb2", "#b23f1f", "#2e8540", "#7a4fb2", "#b2821f", "#444444")


def _esc(text: str) -> str:
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _svg_text(plot: dict) -> str:
    width, height = 640.0, 440.0
    left, right, top, bottom = 82.0, 26.0, 46.0, 62.0
    series = plot["series"]
    all_x = [x for s in series for x in s["xs"]]
    all_y = [y for s in series for y in s["ys"]]
    if not all_x:
        raise ValidationError("nothing to plot")
    x0, x1 = min(all_x), max(all_x)
    y0, y1 = min(all_y), max(all_y)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad_x, pad_y = 0.04 * (x1 - x0), 0.06 * (y1 - y0)
    x0, x1 = x0 - pad_x, x1 + pad_x
    y0, y1 = y0 - pad_y, y1 + pad_y

    def sx(x):
        return left + (x - x0) * (width - left - right) / (x1 - x0)

    def sy(y):
        return height - bottom - (y - y0) * (height - top - bottom) / (y1 - y0)

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 640 440" '
        'font-family="sans-serif" font-size="13">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="15">'
        f"{_esc(plot.get('title', ''))}</text>",
    ]
    for tick in np.linspace(x0 + pad_x, x1 - pad_x, 5):
        px = sx(tick)
        parts.append(
            f'<line x1="{px:.2f}" y1="{top:.1f}" x2="{px:.2f}" '
            f'y2="{height - bottom:.1f}" stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{height - bottom + 18:.1f}" '
            f'text-anchor="middle">{tick:.4g}</text>'
        )
    for tick in np.linspace(y0 + pad_y, y1 - pad_y, 5):
        py = sy(tick)
        parts.append(
            f'<line x1="{left:.1f}" y1="{py:.2f}" x2="{width - right:.1f}" '
            f'y2="{py:.2f}" stroke="#dddddd"/>'
        )
        parts.append(
            f'<text x="{left - 8:.1f}" y="{py + 4:.2f}" text-anchor="end">{tick:.4g}</text>'
        )
    parts.append(
        f'<line x1="{left:.1f}" y1="{height - bottom:.1f}" x2="{width - right:.1f}" '
        f'y2="{height - bottom:.1f}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{left:.1f}" y1="{top:.1f}" x2="{left:.1f}" '
        f'y2="{height - bottom:.1f}" stroke="black"/>'
    )
    parts.append(
        f'<text x="{(left + width - right) / 2:.1f}" y="{height - 16:.1f}" '
        f'text-anchor="middle">{_esc(plot["xlabel"])}</text>'
    )
    parts.append(
        f'<text x="20" y="{(top + height - bottom) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {(top + height - bottom) / 2:.1f})">'
        f"{_esc(plot['ylabel'])}</text>"
    )
    for idx, entry in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = " ".join(
            f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(entry["xs"], entry["ys"])
        )
        if len(entry["xs"]) > 1:
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>'
            )
        for x, y in zip(entry["xs"], entry["ys"]):
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.6" fill="{color}"/>')
    if len(series) > 1:
        for idx, entry in enumerate(series):
            ly = top + 14 + 18 * idx
            lx = width - right - 110
            color = _PALETTE[idx % len(_PALETTE)]
            parts.append(
                f'<line x1="{lx:.1f}" y1="{ly:.1f}" x2="{lx + 24:.1f}" y2="{ly:.1f}" '
                f'stroke="{color}" stroke-width="1.8"/>'
            )
            parts.append(
                f'<text x="{lx + 30:.1f}" y="{ly + 4:.1f}">{_esc(entry["label"])}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_artifacts(obj, format: str, path: str) -> dict:
    """Write a curve, region boundary, curve list, or report to `path`.

    format "csv" emits the tabular view, "json" the full document with
    witnesses, "svg" a static plot.  Returns {path, sha256, bytes}.
    """
    fmt = str(format).lower()
    views = _views_of(obj)
    if fmt == "csv":
        if views.rows is None:
            raise ValidationError("this artifact has no tabular form; use --format json")
        text = _csv_text(views.rows, views.columns)
    elif fmt == "json":
        text = _json_text(views.payload)
    elif fmt == "svg":
        if views.plot is None:
            raise ValidationError("this artifact has no plot form")
        text = _svg_text(views.plot)
    else:
        raise ValidationError(f"format must be csv, json, or svg, got {format!r}")
    data = text.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)
    return {"path": path, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


# ---------------------------------------------------------------------------
# argument parsing


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # unknown flags and malformed usage
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}".rstrip())


def _int_flag(text: str, name: str) -> int:
    try:
        return int(str(text).strip())
    except ValueError:
        raise ValidationError(f"{name} wants an integer, got {text!r}")


def _float_list(text: str, name: str) -> list:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"{name} wants comma-separated numbers, got {text!r}")


def _build_parser() -> _Parser:
    solver_flags = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    solver_flags.add_argument("--dw", help="bottleneck dimension (dim-study: comma list)")
    solver_flags.add_argument("--dv", type=int, help="environment dimension")
    solver_flags.add_argument("--grid", help="point count N, or comma-separated targets")
    solver_flags.add_argument("--beta-grid", help="comma-separated multiplier sweep")
    solver_flags.add_argument("--restarts", type=int, help="random restarts per multiplier")
    solver_flags.add_argument("--max-iters", type=int, help="iteration budget per descent")
    solver_flags.add_argument("--seed", type=int, help="base RNG seed")

    output_flags = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    output_flags.add_argument("--out", help="output file (accompanied by a manifest)")
    output_flags.add_argument("--format", choices=("csv", "json"), help="output format")
    output_flags.add_argument("--plot", help="write a static SVG plot to this path")

    state_flag = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    state_flag.add_argument(
        "--state", required=True,
        help="builtin spec like rho3:p=0.4 or bsc:delta=0.1, or a JSON state file",
    )

    mode_flags = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    group = mode_flags.add_mutually_exclusive_group()
    group.add_argument("--classical", action="store_true", help="classical solver on a joint table")
    group.add_argument("--quantum", action="store_true", help="quantum solver (default)")
    mode_flags.add_argument(
        "--normalize", action="store_true",
        help="rescale to unit-square axes (pf: computes the dual form)",
    )

    top = _Parser(prog="bottleneck-lab", allow_abbrev=False, description=__doc__)
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", metavar="command", required=True)

    sub.add_parser(
        "state", parents=[state_flag, output_flags], allow_abbrev=False,
        help="materialize a state as a JSON file",
    )
    sub.add_parser(
        "ib", parents=[state_flag, mode_flags, solver_flags, output_flags],
        allow_abbrev=False, help="information-bottleneck curve",
    )
    sub.add_parser(
        "pf", parents=[state_flag, mode_flags, solver_flags, output_flags],
        allow_abbrev=False, help="privacy-funnel curve",
    )
    sub.add_parser(
        "rate-region", parents=[state_flag, solver_flags, output_flags],
        allow_abbrev=False, help="helper/primary rate-region boundary",
    )
    sub.add_parser(
        "dim-study", parents=[state_flag, solver_flags, output_flags],
        allow_abbrev=False, help="bottleneck curves across --dw values",
    )
    verify_parser = sub.add_parser(
        "verify", parents=[output_flags], allow_abbrev=False,
        help="run property-check suites",
    )
    verify_parser.add_argument("--suite", default="all", help="suite name or 'all'")
    verify_parser.add_argument("--seed", type=int, default=7, help="suite RNG seed")
    return top


# ---------------------------------------------------------------------------
# subcommand handlers


@dataclass
class _RunResult:
    artifact: object
    config: dict
    seed: Optional[int]
    exit_code: int = 0
    lines: tuple = ()


def _resolve_grid(text, upper: float, count: int = 9) -> np.ndarray:
    if text is None:
        return np.linspace(0.0, float(upper), count)
    s = str(text).strip()
    if "," not in s:
        try:
            n = int(s)
        except ValueError:
            pass
        else:
            if n < 1:
                raise ValidationError("--grid point count must be >= 1")
            return np.linspace(0.0, float(upper), n)
    values = _float_list(s, "--grid")
    if not values:
        raise ValidationError("--grid must name at least one target")
    return np.array(values, dtype=float)


def _config_from_flags(ns, quantum: bool) -> SolverConfig:
    base = _default_quantum_config() if quantum else SolverConfig()
    over = {}
    if ns.restarts is not None:
        over["restarts"] = ns.restarts
    if ns.seed is not None:
        over["seed"] = ns.seed
    if ns.max_iters is not None:
        over["max_iters"] = ns.max_iters
    if ns.beta_grid is not None:
        over["beta_grid"] = tuple(_float_list(ns.beta_grid, "--beta-grid"))
    if quantum and ns.dw is not None:
        over["d_W"] = _int_flag(ns.dw, "--dw")
    if quantum and ns.dv is not None:
        over["d_V"] = ns.dv
    return replace(base, **over) if over else base


def _solver_dict(cfg: SolverConfig) -> dict:
    return _jsonable({f.name: getattr(cfg, f.name) for f in dc_fields(cfg)})


def _common_config(ns, spec, extra: dict) -> dict:
    config = {"subcommand": ns.command, "state": spec.describe() if spec else None}
    config.update(extra)
    config["out"] = ns.out
    config["format"] = ns.format
    config["plot"] = getattr(ns, "plot", None)
    return _jsonable(config)


def _curve_command(ns, funnel: bool) -> _RunResult:
    spec = StateSpec.parse(ns.state)
    name = "pf" if funnel else "ib"
    if ns.classical:
        table = spec.table()
        d_w = _int_flag(ns.dw, "--dw") if ns.dw is not None else table.shape[0] + 1
        cfg = _config_from_flags(ns, quantum=False)
        upper = shannon_entropy(table.sum(axis=1)) if funnel \
            else shannon_mutual_information(table)
        grid = _resolve_grid(ns.grid, upper)
        if funnel:
            curve = classical_pf_curve(table, d_w, grid, cfg)
        else:
            curve = classical_ib_curve(table, d_w, grid, cfg)
        rho = embed_classical_joint(table)
        mode = "classical"
    else:
        rho = spec.density()
        _require_xy(rho)
        cfg = _config_from_flags(ns, quantum=True)
        s_x = von_neumann_entropy(partial_trace(rho, {"X"})).value
        upper = 2.0 * s_x if funnel and not ns.normalize \
            else mutual_information(rho, ["X"], ["Y"])
        grid = _resolve_grid(ns.grid, upper)
        if funnel:
            curve = quantum_pf_curve(rho, cfg, grid, dual=ns.normalize)
        else:
            curve = quantum_ib_curve(rho, cfg, grid)
        d_w = curve.meta["d_w"]
        mode = "quantum"
    if ns.normalize:
        curve = normalize_curve(curve, rho, "pf" if funnel else "ib")
    config = _common_config(ns, spec, {
        "mode": mode,
        "normalize": bool(ns.normalize),
        "d_w": int(d_w),
        "grid": [float(g) for g in grid],
        "solver": _solver_dict(cfg),
    })
    label = f"{mode} {name} curve: {len(curve.points)} points"
    return _RunResult(curve, config, cfg.seed, lines=(label,))


def _cmd_ib(ns) -> _RunResult:
    return _curve_command(ns, funnel=False)


def _cmd_pf(ns) -> _RunResult:
    return _curve_command(ns, funnel=True)


def _cmd_rate_region(ns) -> _RunResult:
    spec = StateSpec.parse(ns.state)
    rho = spec.density()
    _require_xy(rho)
    cfg = _config_from_flags(ns, quantum=True)
    s_x = von_neumann_entropy(partial_trace(rho, {"X"})).value
    grid = _resolve_grid(ns.grid, s_x)
    boundary = wak_boundary(rho, grid, cfg)
    config = _common_config(ns, spec, {
        "grid": [float(g) for g in grid],
        "solver": _solver_dict(cfg),
    })
    label = f"rate-region boundary: {len(boundary)} points"
    return _RunResult(boundary, config, cfg.seed, lines=(label,))


def _cmd_dim_study(ns) -> _RunResult:
    spec = StateSpec.parse(ns.state)
    rho = spec.density()
    _require_xy(rho)
    if ns.dw is None:
        raise ValidationError("dim-study needs --dw with a comma-separated list, e.g. --dw 2,3,4")
    dims = [_int_flag(tok, "--dw") for tok in str(ns.dw).split(",") if tok.strip()]
    base = _config_from_flags(ns, quantum=False)  # d_W comes per curve
    cfg = replace(_default_quantum_config(), **{
        f.name: getattr(base, f.name)
        for f in dc_fields(base)
        if f.name in ("restarts", "seed", "max_iters", "beta_grid")
        and getattr(base, f.name) != getattr(SolverConfig(), f.name)
    })
    if ns.dv is not None:
        cfg = replace(cfg, d_V=ns.dv)
    upper = mutual_information(rho, ["X"], ["Y"])
    grid = _resolve_grid(ns.grid, upper)
    curves = dimension_study(rho, dims, cfg, grid)
    config = _common_config(ns, spec, {
        "d_w_list": dims,
        "grid": [float(g) for g in grid],
        "solver": _solver_dict(cfg),
    })
    label = f"dimension study: d_W in {dims}, {len(grid)} grid points"
    return _RunResult(curves, config, cfg.seed, lines=(label,))


def _cmd_state(ns) -> _RunResult:
    spec = StateSpec.parse(ns.state)
    payload = spec.state_payload()
    if ns.format == "csv" or (ns.format is None and ns.out and ns.out.endswith(".csv")):
        raise ValidationError("state files are JSON documents; use --format json")
    config = _common_config(ns, spec, {})
    shape = "table" if "table" in payload else "matrix"
    return _RunResult(dict(payload), config, None, lines=(f"state payload: {shape}",))


def _cmd_verify(ns) -> _RunResult:
    checks = run_suite(ns.suite, seed=ns.seed)
    passed = all(c.passed for c in checks)
    lines = tuple(
        f"[{'ok' if c.passed else 'FAIL'}] {c.suite}/{c.name}: {c.detail}" for c in checks
    ) + (f"{sum(c.passed for c in checks)}/{len(checks)} checks passed",)
    payload = {
        "suite": ns.suite,
        "seed": ns.seed,
        "passed": passed,
        "checks": [
            {"suite": c.suite, "name": c.name, "passed": c.passed, "detail": c.detail}
            for c in checks
        ],
        "_rows": [
            {"suite": c.suite, "name": c.name, "passed": c.passed, "detail": c.detail}
            for c in checks
        ],
        "_columns": ("suite", "name", "passed", "detail"),
    }
    config = _common_config(ns, None, {"suite": ns.suite, "seed": ns.seed})
    return _RunResult(payload, config, ns.seed, exit_code=0 if passed else 4, lines=lines)


_HANDLERS = {
    "state": _cmd_state,
    "ib": _cmd_ib,
    "pf": _cmd_pf,
    "rate-region": _cmd_rate_region,
    "dim-study": _cmd_dim_study,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# driver


def _check_thread_cap() -> None:
    raw = os.environ.get("BOTTLENECK_LAB_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"BOTTLENECK_LAB_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ValidationError(f"BOTTLENECK_LAB_THREADS must be >= 1, got {n}")


def _default_format(ns) -> str:
    if ns.format:
        return ns.format
    if ns.out:
        ext = os.path.splitext(ns.out)[1].lower()
        if ext == ".json":
            return "json"
        if ext == ".csv":
            return "csv"
    return "json" if ns.command in ("state", "verify") else "csv"


def run_command(argv=None) -> int:
    """Parse argv, run one subcommand, write artifacts plus a manifest."""
    argv = list(sys.argv[1:]) if argv is None else [str(a) for a in argv]
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as err:
        print(str(err), file=sys.stderr)
        return 64
    except SystemExit as err:  # --help / --version
        return int(err.code) if err.code else 0

    started = time.perf_counter()
    try:
        _check_thread_cap()
        result = _HANDLERS[ns.command](ns)
        written = []
        if ns.out:
            written.append(export_artifacts(result.artifact, _default_format(ns), ns.out))
        if getattr(ns, "plot", None):
            written.append(export_artifacts(result.artifact, "svg", ns.plot))
    except InfeasibleError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 3
    except ValidationError as err:
        print(f"invalid: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"cannot write: {err}", file=sys.stderr)
        return 2

    wall = time.perf_counter() - started
    manifest = RunManifest(
        command=tuple(argv),
        config=result.config,
        seed=result.seed,
        version=__version__,
        wall_time_s=round(wall, 3),
        outputs=tuple(written),
    )
    for line in result.lines:
        print(line)
    for entry in written:
        print(f"wrote {entry['path']} ({entry['bytes']} bytes, sha256 {entry['sha256'][:12]})")
    if written:
        target = (ns.out or ns.plot) + ".manifest.json"
        try:
            with open(target, "wb") as fh:
                fh.write(_json_text(manifest.to_dict()).encode("utf-8"))
        except OSError as err:
            print(f"cannot write: {err}", file=sys.stderr)
            return 2
        print(f"manifest {target}")
    else:
        print(_json_text(manifest.to_dict()), end="")
    return result.exit_code


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
