"""Writers for simulation results.

All CSVs use ``.`` decimals (``repr`` of floats) and ``\\n`` line endings so
that identical runs produce identical bytes on every platform.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .navgraph import NavGraph

BLOCKED = "-1"


def _num(x) -> str:
    return repr(float(x))


def _write(path: Path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_graph(graph: NavGraph, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["id_a,id_b,weight"]
    lines += [f"{i},{j},{_num(w)}" for (i, j), w in graph.edges.items()]
    path = out / "graph.csv"
    _write(path, lines)
    return path


def frame_csv_lines(values: np.ndarray, open_mask: np.ndarray) -> list:
    lines = []
    for j in range(values.shape[0]):
        row = [_num(v) if ok else BLOCKED for v, ok in zip(values[j], open_mask[j])]
        lines.append(",".join(row))
    return lines


def pgm_bytes(values: np.ndarray, open_mask: np.ndarray, vmax: float) -> bytes:
    """Binary 8-bit PGM; the first image row is the largest y."""
    ny, nx = values.shape
    if vmax > 0:
        scaled = np.clip(np.rint(values / vmax * 255.0), 0, 255)
    else:
        scaled = np.zeros_like(values)
    scaled = np.where(open_mask, scaled, 0).astype(np.uint8)
    header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
    return header + scaled[::-1].tobytes()


def write_outputs(result, out_dir, pgm: bool | None = None) -> list:
    """Write risk.csv, per_agent.csv, summary.json, graph.csv and per-frame files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if pgm is None:
        pgm = result.config.outputs.pgm
    written = []

    risk = ["t_seconds,avg_risk,infected_count"]
    risk += [f"{_num(f.t)},{_num(f.average_risk)},{f.infected_count}" for f in result.frames]
    _write(out / "risk.csv", risk)
    written.append(out / "risk.csv")

    rows = ["t_seconds,agent_id,x,y,status,P"]
    for f in result.frames:
        for a in f.agents:
            rows.append(f"{_num(f.t)},{a.id},{_num(a.position.x)},{_num(a.position.y)},{a.status.value},{_num(a.risk)}")
    _write(out / "per_agent.csv", rows)
    written.append(out / "per_agent.csv")

    written.append(write_graph(result.graph, out))

    mask = result.open_mask
    vmax = max((float(f.field.max()) for f in result.frames), default=0.0)
    for k, f in enumerate(result.frames):
        path = out / f"frame_{k:06d}.csv"
        _write(path, frame_csv_lines(f.field, mask))
        written.append(path)
        if pgm:
            ppath = out / f"frame_{k:06d}.pgm"
            ppath.write_bytes(pgm_bytes(f.field, mask, vmax))
            written.append(ppath)

    summary = {
        "name": result.config.name,
        "final_counts": result.final_counts(),
        "final_average_risk": result.frames[-1].average_risk if result.frames else 0.0,
        "agents": result.summary(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n", encoding="utf-8", newline="\n")
    written.append(out / "summary.json")
    return written
