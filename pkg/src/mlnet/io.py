"""File formats: multiplex edge lists, trace and table CSVs, config files.

Edge list
---------
One edge per line, whitespace separated::

    layer_id source_id target_id [weight]

Ids are non-negative integers.  Lines starting with ``#`` are comments,
except the optional headers ``#nodes N`` and ``#layers L``, which add ids
``0..N-1`` (``0..L-1``) to the node (layer) universe so isolated nodes and
empty layers survive.  Otherwise the universe is every id mentioned on any
line.  Ids are re-indexed densely in sorted order.  An edge is present iff
its weight (1 when omitted) is at least ``min_weight``.  Self-loops are
dropped and duplicates collapse; both are counted.

Config
------
Flat ``key=value`` lines with dotted section prefixes (``gen.n=400``,
``exp.rho=0.1,0.2``), ``#`` comments allowed; or a ``.json`` file with one
object per section.
"""
import csv
import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mlnet.exceptions import DataFormatError
from mlnet.model import MultiLayerNetwork
from mlnet.selection import CandidatePair, TraceEntry

__all__ = [
    "IngestReport",
    "read_multiplex_edgelist",
    "load_multiplex_edgelist",
    "write_multiplex_edgelist",
    "format_float",
    "write_trace_csv",
    "read_trace_csv",
    "write_table_csv",
    "read_table_csv",
    "load_config",
    "parse_config_text",
]

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("m", "k_s", "k_r", "t_hat", "ratio", "stopped")
_HEADER = re.compile(r"^#\s*(nodes|layers)\s+(\d+)\s*$", re.IGNORECASE)


@dataclass(frozen=True)
class IngestReport:
    n_edge_lines: int
    n_edges: int
    n_self_loops: int
    n_duplicates: int
    n_below_threshold: int


def _parse_id(token, lineno, what):
    try:
        value = int(token)
    except ValueError:
        raise DataFormatError(f"line {lineno}: {what} id {token!r} is not an integer") from None
    if value < 0:
        raise DataFormatError(f"line {lineno}: {what} id {value} is negative")
    return value


def read_multiplex_edgelist(path, min_weight=0.0):
    """Parse an edge-list file.

    Returns
    -------
    (MultiLayerNetwork, IngestReport)
    """
    declared = {"nodes": 0, "layers": 0}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HEADER.match(line)
                if m:
                    declared[m.group(1).lower()] = int(m.group(2))
                continue
            fields = line.split()
            if len(fields) not in (3, 4):
                raise DataFormatError(
                    f"line {lineno}: expected 3 or 4 fields, got {len(fields)}"
                )
            layer = _parse_id(fields[0], lineno, "layer")
            src = _parse_id(fields[1], lineno, "source")
            dst = _parse_id(fields[2], lineno, "target")
            weight = 1.0
            if len(fields) == 4:
                try:
                    weight = float(fields[3])
                except ValueError:
                    raise DataFormatError(
                        f"line {lineno}: weight {fields[3]!r} is not numeric"
                    ) from None
                if math.isnan(weight):
                    raise DataFormatError(f"line {lineno}: weight is NaN")
            rows.append((layer, src, dst, weight))
    if not rows:
        raise DataFormatError(f"{path}: no edge lines found")

    arr = np.array([r[:3] for r in rows], dtype=np.int64)
    weights = np.array([r[3] for r in rows])
    node_ids = np.union1d(np.union1d(arr[:, 1], arr[:, 2]), np.arange(declared["nodes"]))
    layer_ids = np.union1d(arr[:, 0], np.arange(declared["layers"]))
    li = np.searchsorted(layer_ids, arr[:, 0])
    si = np.searchsorted(node_ids, arr[:, 1])
    ti = np.searchsorted(node_ids, arr[:, 2])

    self_loop = si == ti
    keep = (weights >= min_weight) & ~self_loop
    A = np.zeros((layer_ids.size, node_ids.size, node_ids.size), dtype=np.uint8)
    flat = np.ravel_multi_index((li[keep], si[keep], ti[keep]), A.shape)
    unique = np.unique(flat)
    A.reshape(-1)[unique] = 1
    report = IngestReport(
        n_edge_lines=len(rows),
        n_edges=int(unique.size),
        n_self_loops=int(self_loop.sum()),
        n_duplicates=int(flat.size - unique.size),
        n_below_threshold=int(((weights < min_weight) & ~self_loop).sum()),
    )
    if report.n_self_loops:
        log.warning("%s: dropped %d self-loop lines", path, report.n_self_loops)
    net = MultiLayerNetwork(A, node_ids=tuple(int(x) for x in node_ids),
                            layer_ids=tuple(int(x) for x in layer_ids))
    return net, report


def load_multiplex_edgelist(path, min_weight=0.0):
    """Load an edge-list file as a :class:`MultiLayerNetwork`."""
    return read_multiplex_edgelist(path, min_weight)[0]


def write_multiplex_edgelist(net, path):
    """Write ``net`` with internal indices and ``#nodes``/``#layers`` headers."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#nodes {net.n}\n#layers {net.L}\n")
        for ell, i, j in zip(*np.nonzero(net.layers)):
            fh.write(f"{ell} {i} {j}\n")


def format_float(x):
    """17 significant digits; ``inf``/``-inf``/``nan`` spelled out."""
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_table_csv(rows, path, columns=None):
    """Write a list of dicts as CSV with fixed float formatting and LF endings."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(c)) for c in columns])


def read_table_csv(path):
    """Read a CSV written by :func:`write_table_csv` as a list of string dicts."""
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_trace_csv(trace, path):
    """Write a selection trace: ``m,k_s,k_r,t_hat,ratio,stopped``."""
    rows = [
        {
            "m": e.m,
            "k_s": e.pair.k_s,
            "k_r": e.pair.k_r,
            "t_hat": float(e.t_hat),
            "ratio": None if e.ratio is None else float(e.ratio),
            "stopped": bool(e.stopped),
        }
        for e in trace.entries
    ]
    write_table_csv(rows, path, TRACE_COLUMNS)


def read_trace_csv(path):
    """Parse a trace CSV back into a list of :class:`TraceEntry`."""
    rows = read_table_csv(path)
    entries = []
    for row in rows:
        if tuple(row.keys()) != TRACE_COLUMNS:
            raise DataFormatError(f"{path}: unexpected trace header {tuple(row.keys())}")
        entries.append(
            TraceEntry(
                int(row["m"]),
                CandidatePair(int(row["k_s"]), int(row["k_r"])),
                float(row["t_hat"]),
                float(row["ratio"]) if row["ratio"] != "" else None,
                row["stopped"] == "1",
            )
        )
    return entries


def parse_config_text(text):
    """Parse ``section.key=value`` lines into ``{section: {key: value}}``.

    Keys without a dot go into the ``""`` section.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"config line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        section, _, name = key.rpartition(".")
        if not name:
            raise DataFormatError(f"config line {lineno}: empty key")
        out.setdefault(section, {})[name] = value
    return out


def load_config(path):
    """Load a ``key=value`` or JSON config file as nested string-keyed dicts."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise DataFormatError(f"{path}: top level must be an object")
        out = {}
        for section, values in data.items():
            if isinstance(values, dict):
                out[section] = {k: v for k, v in values.items()}
            else:
                out.setdefault("", {})[section] = values
        return out
    return parse_config_text(text)
