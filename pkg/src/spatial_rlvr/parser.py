"""Splitting model responses into think / map / answer segments.

Tag grammar: a response is well formed when it holds exactly one
``<think>...</think>`` pair and exactly one ``<answer>...</answer>`` pair,
with the think block closed before the answer opens. An optional
``<map>...</map>`` block may sit inside the think block or anywhere after
it; its body is a JSON object mapping category names to lists of ``[x, y]``
integer cells, e.g. ``{"chair": [[2, 3], [7, 1]], "sofa": [[0, 9]]}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from .errors import AnswerParseError, MapParseError
from .qa import LETTERS
from .scene import DEFAULT_MAP_SIZE, GridMap


@dataclass(frozen=True)
class ParsedResponse:
    raw: str
    think_text: str | None = None
    map_text: str | None = None
    answer_text: str | None = None
    parsed_map: GridMap | None = None
    well_formed: bool = False
    think_length: int = 0
    map_error: str | None = None


def _block(raw: str, tag: str, start: int = 0) -> tuple[int, int, str] | None:
    """First ``<tag>...</tag>`` at or after ``start``: (open, close, body)."""
    i = raw.find(f"<{tag}>", start)
    if i < 0:
        return None
    body_start = i + len(tag) + 2
    j = raw.find(f"</{tag}>", body_start)
    if j < 0:
        return None
    return i, j, raw[body_start:j]


def parse_response(raw: str, map_size: int = DEFAULT_MAP_SIZE) -> ParsedResponse:
    """Split ``raw`` into its tagged segments. Never raises."""
    think = _block(raw, "think")
    answer = _block(raw, "answer")
    counts_ok = all(raw.count(t) == 1 for t in ("<think>", "</think>", "<answer>", "</answer>"))
    well_formed = bool(think and answer and counts_ok and think[1] < answer[0])

    map_block = _block(raw, "map", think[0] if think else 0)
    map_text = map_block[2] if map_block else None
    parsed_map, map_error = None, None
    if map_text is not None:
        try:
            parsed_map = parse_map_text(map_text, map_size)
        except MapParseError as exc:
            map_error = str(exc)

    think_text = think[2] if think else None
    return ParsedResponse(
        raw=raw,
        think_text=think_text,
        map_text=map_text,
        answer_text=answer[2] if answer else None,
        parsed_map=parsed_map,
        well_formed=well_formed,
        think_length=len(think_text.split()) if think_text else 0,
        map_error=map_error,
    )


def render_response(resp: ParsedResponse) -> str:
    """Tagged text for a parsed response (inverse of :func:`parse_response`)."""
    parts = [f"<think>{resp.think_text or ''}</think>"]
    if resp.map_text is not None and "<map>" not in (resp.think_text or ""):
        parts.append(f"<map>{resp.map_text}</map>")
    parts.append(f"<answer>{resp.answer_text or ''}</answer>")
    return "".join(parts)


def parse_map_text(map_text: str, size: int = DEFAULT_MAP_SIZE) -> GridMap:
    try:
        doc = json.loads(map_text)
    except json.JSONDecodeError as exc:
        raise MapParseError(f"map is not valid JSON: {exc.msg} at column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise MapParseError("map must be a JSON object")
    if not doc:
        raise MapParseError("empty map")
    cells: dict[str, tuple[tuple[int, int], ...]] = {}
    for category, raw_cells in doc.items():
        if not category.strip():
            raise MapParseError("empty category name")
        if not isinstance(raw_cells, list) or not raw_cells:
            raise MapParseError(f"'{category}' must map to a non-empty list of [x, y] cells")
        parsed = []
        for cell in raw_cells:
            if (not isinstance(cell, list) or len(cell) != 2
                    or not all(isinstance(v, int) and not isinstance(v, bool) for v in cell)):
                raise MapParseError(f"'{category}': cell {cell!r} is not a pair of integers")
            x, y = cell
            if not (0 <= x < size and 0 <= y < size):
                raise MapParseError(f"'{category}': cell [{x}, {y}] outside [0, {size - 1}]")
            parsed.append((x, y))
        cells[category] = tuple(parsed)
    return GridMap(size, cells)


_LEADING_LETTER = re.compile(r"^\s*[\(\[]?([A-Ea-e])(?:[\.\):\]]|,|\s|$)")
_STANDALONE_LETTER = re.compile(r"(?<![A-Za-z])([A-E])(?![A-Za-z])")


def _norm(text: str) -> str:
    return " ".join(text.lower().split()).strip(" .")


def extract_choice(answer_text: str, options: Sequence[str]) -> int:
    """Index of the option named by an answer string.

    Accepts a leading option letter ("B", "b)", "(C) ...") or the full text of
    exactly one option. Raises AnswerParseError when nothing or more than one
    option matches.
    """
    if not options:
        raise ValueError("options must be non-empty")
    valid = LETTERS[:len(options)]
    m = _LEADING_LETTER.match(answer_text)
    if m and m.group(1).upper() in valid:
        letter = m.group(1).upper()
        others = {g for g in _STANDALONE_LETTER.findall(answer_text[m.end():]) if g in valid}
        if others - {letter}:
            raise AnswerParseError(f"unparseable choice (ambiguous): {answer_text!r}")
        return valid.index(letter)

    text = _norm(answer_text)
    hits = [k for k, opt in enumerate(options) if _norm(opt) and _norm(opt) in text]
    # drop options that only match as part of a longer matching option
    hits = [k for k in hits
            if not any(h != k and _norm(options[k]) in _norm(options[h]) for h in hits)]
    if len(hits) != 1:
        raise AnswerParseError(f"unparseable choice: {answer_text!r}")
    return hits[0]


_NUMBER = re.compile(r"[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|[-+]?\.\d+")


def extract_number(answer_text: str) -> float:
    """First decimal numeral in the text ("1,200 cm" -> 1200.0)."""
    m = _NUMBER.search(answer_text)
    if not m:
        raise AnswerParseError(f"no number in {answer_text!r}")
    return float(m.group(0).replace(",", ""))
