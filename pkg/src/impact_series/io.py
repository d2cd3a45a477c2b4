"""Event-stream and report serialization.

Two event formats, same field order
(``trial_id, class, time_tag_delta, sigma, omega, hidden_path, hidden_partner``):

* ``csv``: ``#``-prefixed header comments, a column-name row, one row per
  event; absent hidden fields are empty cells.
* ``jsonl``: a first ``{"header": {...}}`` line, then one object per event;
  absent hidden fields are ``null``.

Blinded exports drop the two hidden columns entirely.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterator
from pathlib import Path
from typing import IO, Literal

from . import __version__
from .core_model import CLASS_TAGS, OUTCOMES, PATH_PAIRS, ClassTag, OutcomePair, PathPair
from .montecarlo import EventBatch, EventRecord

Format = Literal["csv", "jsonl"]

FIELDS = ("trial_id", "class", "time_tag_delta", "sigma", "omega", "hidden_path", "hidden_partner")
BLINDED_FIELDS = FIELDS[:5]

_PATH_LABELS = [str(p) for p in PATH_PAIRS]


def header_meta(command: list[str] | None = None, seed: int | None = None, **extra) -> dict:
    meta = {"tool": "impact-series", "version": __version__}
    if command is not None:
        meta["command"] = " ".join(command)
    if seed is not None:
        meta["seed"] = seed
    meta.update(extra)
    return meta


def _label(i: int) -> str | None:
    return _PATH_LABELS[i] if i >= 0 else None


def _rows(batch: EventBatch, blinded: bool) -> Iterator[tuple]:
    classes = [t.value for t in CLASS_TAGS]
    sig = [o.sigma for o in OUTCOMES]
    om = [o.omega for o in OUTCOMES]
    cols = zip(
        batch.trial_id.tolist(),
        batch.class_idx.tolist(),
        batch.time_tag_delta.tolist(),
        batch.outcome.tolist(),
        batch.hidden_path.tolist(),
        batch.hidden_partner.tolist(),
    )
    for tid, c, dt, o, hp, hq in cols:
        row = (tid, classes[c], dt, sig[o], om[o])
        yield row if blinded else row + (_label(hp), _label(hq))


def write_events(
    batch: EventBatch, out: IO[str], fmt: Format = "csv", blinded: bool = False, meta: dict | None = None
) -> None:
    meta = dict(meta or {})
    fields = BLINDED_FIELDS if blinded else FIELDS
    if fmt == "csv":
        for key, value in meta.items():
            out.write(f"# {key}: {value}\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(fields)
        writer.writerows(
            tuple("" if v is None else v for v in row) for row in _rows(batch, blinded)
        )
    elif fmt == "jsonl":
        out.write(json.dumps({"header": {**meta, "fields": list(fields)}}) + "\n")
        for row in _rows(batch, blinded):
            out.write(json.dumps(dict(zip(fields, row))) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def _record(d: dict) -> EventRecord:
    hp, hq = d.get("hidden_path"), d.get("hidden_partner")
    return EventRecord(
        int(d["trial_id"]),
        ClassTag(d["class"]),
        float(d["time_tag_delta"]),
        OutcomePair(int(d["sigma"]), int(d["omega"])),
        PathPair.parse(hp) if hp else None,
        PathPair.parse(hq) if hq else None,
    )


def read_events(path: str | Path) -> tuple[EventBatch, dict]:
    """Load an exported stream (either format); returns ``(batch, header)``."""
    path = Path(path)
    header: dict = {}
    with path.open() as fh:
        first = fh.readline()
        fh.seek(0)
        if first.lstrip().startswith("{"):
            records = []
            for line in fh:
                obj = json.loads(line)
                if "header" in obj:
                    header = obj["header"]
                else:
                    records.append(_record(obj))
        else:
            lines = []
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition(": ")
                    header[key] = value
                else:
                    lines.append(line)
            records = [_record(row) for row in csv.DictReader(lines)]
    return EventBatch.from_records(records), header


def write_json(obj: dict, out: IO[str]) -> None:
    json.dump(obj, out, indent=2, sort_keys=False)
    out.write("\n")
