"""Plain-text file formats.

* vectors: one decimal float per line, UTF-8, LF line endings;
* candidate families: JSON ``{"n": int, "sets": [[int, ...], ...]}`` with 1-based indices;
* tables and regions: JSON documents produced by the ``to_dict`` methods.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .seqmodel import CandidateFamily


def parse_vector(text: str, source: str = "<input>") -> np.ndarray:
    values = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        s = line.strip()
        if not s:
            continue
        try:
            v = float(s)
        except ValueError:
            raise InvalidArgument(f"{source}:{lineno}: cannot parse {s!r} as a float") from None
        if not math.isfinite(v):
            raise InvalidArgument(f"{source}:{lineno}: non-finite value {s!r}")
        values.append(v)
    if not values:
        raise InvalidArgument(f"{source}: no values")
    return np.array(values)


def read_vector(path) -> np.ndarray:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidArgument(f"cannot read {p}: {exc.strerror}") from None
    return parse_vector(text, str(p))


def format_vector(v) -> str:
    return "".join(f"{float(x)!r}\n" for x in np.asarray(v, dtype=float))


def write_vector(path, v) -> None:
    Path(path).write_text(format_vector(v), encoding="utf-8", newline="\n")


def family_from_dict(d: dict, source: str = "<family>") -> CandidateFamily:
    try:
        n = int(d["n"])
        sets = [[int(i) for i in s] for s in d["sets"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgument(f"{source}: malformed family document ({exc})") from None
    return CandidateFamily.explicit(n, sets)


def read_family(path) -> CandidateFamily:
    p = Path(path)
    try:
        d = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InvalidArgument(f"cannot read {p}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{p}: invalid JSON ({exc})") from None
    return family_from_dict(d, str(p))


def family_to_dict(family: CandidateFamily) -> dict:
    return {"n": family.n, "sets": [list(s) for s in family.members()]} if not family.is_nested \
        else {"n": family.n, "sets": [list(range(1, k + 1)) for k in range(family.n + 1)]}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
