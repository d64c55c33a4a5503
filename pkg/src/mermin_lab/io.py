"""Trial-log serialization, run manifests and summary tables.

JSONL trial schema, one object per line, keys in this order:
    index, alice_setting, bob_setting, alice_outcome, bob_outcome
Settings are integers 1/2/3 under the device policy and float degrees under
the fixed policy. The CSV trial format carries the same columns.

Summary CSV columns (fixed order): see ``SUMMARY_COLUMNS``.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from mermin_lab import __version__
from mermin_lab.trials import TrialLog, device_angle, setting_for_angle

TRIAL_COLUMNS = ("index", "alice_setting", "bob_setting", "alice_outcome", "bob_outcome")
SUMMARY_COLUMNS = (
    "alice_setting", "bob_setting", "n",
    "f_uu", "f_ud", "f_du", "f_dd",
    "same_fraction", "correlation", "correlation_se",
)


def degrees(angle: float) -> float:
    return round(math.degrees(angle), 9) + 0.0


def _setting_labels(log: TrialLog) -> tuple[list[str], list[str]]:
    if log.policy == "device":
        return [str(int(s)) for s in log.alice_setting], [str(int(s)) for s in log.bob_setting]
    cache: dict[float, str] = {}

    def lab(x: float) -> str:
        if x not in cache:
            cache[x] = json.dumps(degrees(x))
        return cache[x]

    return [lab(x) for x in log.alice_angle.tolist()], [lab(x) for x in log.bob_angle.tolist()]


def format_jsonl(log: TrialLog) -> str:
    sa, sb = _setting_labels(log)
    lines = [
        f'{{"index": {i}, "alice_setting": {a}, "bob_setting": {b}, '
        f'"alice_outcome": {oa}, "bob_outcome": {ob}}}\n'
        for i, a, b, oa, ob in zip(log.index.tolist(), sa, sb,
                                   log.alice_outcome.tolist(), log.bob_outcome.tolist())
    ]
    return "".join(lines)


def format_csv(log: TrialLog) -> str:
    sa, sb = _setting_labels(log)
    rows = [",".join(TRIAL_COLUMNS) + "\n"]
    rows.extend(f"{i},{a},{b},{oa},{ob}\n" for i, a, b, oa, ob in zip(
        log.index.tolist(), sa, sb, log.alice_outcome.tolist(), log.bob_outcome.tolist()))
    return "".join(rows)


def write_log(log: TrialLog, path, fmt: str = "jsonl") -> Path:
    path = Path(path)
    if fmt == "jsonl":
        text = format_jsonl(log)
    elif fmt == "csv":
        text = format_csv(log)
    else:
        raise ValueError(f"unknown log format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _log_from_columns(index, sa, sb, oa, ob, meta=None) -> TrialLog:
    device = all(isinstance(x, int) for x in sa) and all(isinstance(x, int) for x in sb)
    if device:
        sa_i = np.array(sa, dtype=np.int8)
        sb_i = np.array(sb, dtype=np.int8)
        a_ang = np.array([device_angle(int(s)) for s in sa]) if len(sa) else np.zeros(0)
        b_ang = np.array([device_angle(int(s)) for s in sb]) if len(sb) else np.zeros(0)
        policy = "device"
    else:
        a_ang = np.radians(np.array(sa, dtype=float))
        b_ang = np.radians(np.array(sb, dtype=float))
        sa_i = np.array([setting_for_angle(x) for x in a_ang.tolist()], dtype=np.int8)
        sb_i = np.array([setting_for_angle(x) for x in b_ang.tolist()], dtype=np.int8)
        policy = "fixed"
    return TrialLog(np.array(index, dtype=np.int64), a_ang, b_ang, sa_i, sb_i,
                    np.array(oa), np.array(ob), policy=policy, meta=meta or {})


def _parse_setting(text: str):
    text = text.strip()
    return float(text) if any(c in text for c in ".eE") else int(text)


def read_log(path) -> TrialLog:
    """Load a JSONL or CSV trial log (format chosen by file extension)."""
    path = Path(path)
    cols: list[list] = [[], [], [], [], []]
    if path.suffix == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != TRIAL_COLUMNS:
                raise ValueError(f"unexpected CSV header {reader.fieldnames!r}")
            for row in reader:
                cols[0].append(int(row["index"]))
                cols[1].append(_parse_setting(row["alice_setting"]))
                cols[2].append(_parse_setting(row["bob_setting"]))
                cols[3].append(int(row["alice_outcome"]))
                cols[4].append(int(row["bob_outcome"]))
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                for k, name in enumerate(TRIAL_COLUMNS):
                    cols[k].append(rec[name])
    return _log_from_columns(*cols, meta={"source": str(path)})


@dataclass
class RunManifest:
    """Everything needed to regenerate a trial log byte for byte."""

    command: str
    spec: dict
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: dict = field(default_factory=dict)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)


def manifest_path(log_path) -> Path:
    return Path(os.fspath(log_path) + ".manifest.json")


def summary_table(log: TrialLog) -> list[dict]:
    """Per-setting-pair outcome frequencies and correlation estimates."""
    rows = []
    if log.policy == "device":
        keys = sorted(set(zip(log.alice_setting.tolist(), log.bob_setting.tolist())))
        masks = [((log.alice_setting == a) & (log.bob_setting == b), a, b) for a, b in keys]
    else:
        masks = [((log.alice_angle == a) & (log.bob_angle == b), degrees(a), degrees(b))
                 for a, b in log.setting_pairs()]
    for mask, la, lb in masks:
        oa, ob = log.alice_outcome[mask], log.bob_outcome[mask]
        n = int(mask.sum())
        counts = [int(np.sum((oa == i) & (ob == j))) for i, j in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
        freqs = [c / n for c in counts]
        corr = freqs[0] - freqs[1] - freqs[2] + freqs[3]
        se = math.sqrt(max(1.0 - corr * corr, 0.0) / n)
        rows.append(dict(zip(SUMMARY_COLUMNS, (
            la, lb, n, *freqs, freqs[0] + freqs[3], corr, se))))
    return rows


def write_summary_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    return path


def format_summary(rows: list[dict]) -> str:
    header = f"{'alice':>7} {'bob':>7} {'n':>9} {'f_uu':>8} {'f_ud':>8} {'f_du':>8} {'f_dd':>8} " \
             f"{'same':>8} {'corr':>9} {'se':>8}"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r['alice_setting']!s:>7} {r['bob_setting']!s:>7} {r['n']:>9d} "
            f"{r['f_uu']:8.5f} {r['f_ud']:8.5f} {r['f_du']:8.5f} {r['f_dd']:8.5f} "
            f"{r['same_fraction']:8.5f} {r['correlation']:9.5f} {r['correlation_se']:8.5f}")
    return "\n".join(lines)
