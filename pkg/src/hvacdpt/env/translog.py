"""JSON-lines transition logging.

Schema per line:
``{"s": [6], "a": float, "s_next": [6], "r": float, "zone": int, "t": int, "episode": int}``
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .mdp import TransitionTuple, ZoneObservation


def transition_to_record(tr: TransitionTuple, zone: int, t: int, episode: int) -> dict:
    return {
        "s": [float(x) for x in tr.s.as_vector()],
        "a": float(tr.a),
        "s_next": [float(x) for x in tr.s_next.as_vector()],
        "r": float(tr.r),
        "zone": int(zone),
        "t": int(t),
        "episode": int(episode),
    }


def record_to_transition(rec: dict) -> tuple[TransitionTuple, int, int, int]:
    tr = TransitionTuple(
        s=ZoneObservation.from_vector(rec["s"]),
        a=float(rec["a"]),
        s_next=ZoneObservation.from_vector(rec["s_next"]),
        r=float(rec["r"]),
    )
    return tr, int(rec["zone"]), int(rec["t"]), int(rec["episode"])


def write_transition_log(path: str | Path, records: Iterable[dict]) -> None:
    with Path(path).open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def read_transition_log(path: str | Path) -> list[dict]:
    out = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
