"""Check outcomes, run records and flat tables for plotting."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = "1"
PASS, FAIL, INCONCLUSIVE, INFO = "pass", "fail", "inconclusive", "info"


def _clean(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


@dataclass
class Check:
    """One measured value against one bound.

    kind "le" asserts measured <= bound + tol; "info" rows are reported only.
    A certificate above cert_tol turns pass into inconclusive; a genuine
    violation stays a failure.
    """

    id: str
    group: str
    measured: float
    bound: float
    kind: str = "le"
    tol: float = 0.0
    certificate: float = 0.0
    cert_tol: float = math.inf
    params: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return float(self.bound - self.measured)

    @property
    def status(self) -> str:
        if self.kind == "info":
            return INFO
        if not (math.isfinite(self.measured) and not math.isnan(self.bound)):
            return INCONCLUSIVE
        if self.measured > self.bound + self.tol:
            return FAIL
        if self.certificate > self.cert_tol:
            return INCONCLUSIVE
        return PASS

    def to_dict(self) -> dict:
        return _clean({
            "id": self.id,
            "group": self.group,
            "measured": float(self.measured),
            "bound": float(self.bound),
            "margin": self.margin,
            "tol": float(self.tol),
            "certificate": float(self.certificate),
            "status": self.status,
            "params": self.params,
        })


def inconclusive(id: str, group: str, reason: str, params: dict | None = None) -> Check:
    p = dict(params or {})
    p["reason"] = reason
    return Check(id, group, math.nan, math.nan, params=p)


def _versions() -> dict:
    import numpy
    import scipy

    from . import __version__

    return {"gaussweyl": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


@dataclass
class RunRecord:
    suite: str
    config_hash: str
    checks: list
    seed: int
    wall_time: float = 0.0
    versions: dict = field(default_factory=_versions)

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0, INFO: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        c = self.counts()
        if c[FAIL]:
            return 1
        if c[INCONCLUSIVE]:
            return 2
        return 0

    def payload(self) -> dict:
        """Everything that must be reproducible from config and seed."""
        return {"schema": SCHEMA_VERSION, "suite": self.suite, "config_hash": self.config_hash, "seed": self.seed,
                "checks": [c.to_dict() for c in self.checks]}

    def payload_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.payload(), sort_keys=True).encode()).hexdigest()

    def to_dict(self) -> dict:
        d = self.payload()
        d["payload_hash"] = self.payload_hash()
        d["counts"] = self.counts()
        d["wall_time"] = self.wall_time
        d["versions"] = self.versions
        return d

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        js = out / f"{self.suite}.json"
        js.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        table = out / f"{self.suite}.csv"
        emit_plot_data(self.to_dict(), "checks", table)
        return js, table


def read_record(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported record schema {data.get('schema')!r}")
    return data


PLOT_KINDS = {
    "checks": ["check-id", "group", "measured", "bound", "margin", "status"],
    "cv-bound": ["symbol-id", "h", "measured-norm", "bound", "margin"],
    "qed": ["t", "observable", "measured", "bound", "residual"],
    "dim-scaling": ["d", "quantity", "measured", "bound", "margin"],
}


def _rows(record: dict, kind: str) -> list:
    rows = []
    for c in record.get("checks", []):
        p = c.get("params", {})
        if kind == "checks":
            rows.append([c["id"], c["group"], c["measured"], c["bound"], c["margin"], c["status"]])
        elif kind == "cv-bound":
            if c["group"] == "cv-bound":
                rows.append([p.get("symbol_id", c["id"]), p.get("h", ""), c["measured"], c["bound"], c["margin"]])
        elif kind == "qed":
            if "t" in p:
                rows.append([p["t"], c["group"], c["measured"], c["bound"], p.get("residual", "")])
        elif kind == "dim-scaling":
            if "d" in p:
                rows.append([p["d"], c["group"], c["measured"], c["bound"], c["margin"]])
    return rows


def emit_plot_data(record: dict, kind: str, path: str | Path) -> Path:
    """Long-format CSV, one row per (parameter, measured, bound)."""
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PLOT_KINDS[kind])
        w.writerows(_rows(record, kind))
    return path
