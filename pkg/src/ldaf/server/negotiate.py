"""Accept-header negotiation over the three supported representations."""
from __future__ import annotations

from typing import Optional

from .web import HttpError

FORMATS = ("html", "turtle", "json")

MEDIA_TYPES = {
    "text/html": "html",
    "text/turtle": "turtle",
    "application/json": "json",
}

CONTENT_TYPES = {
    "html": "text/html; charset=utf-8",
    "turtle": "text/turtle; charset=utf-8",
    "json": "application/json",
}

_ORDER = {"html": 0, "turtle": 1, "json": 2}


def _parse_ranges(header: str) -> list[tuple[str, str, float]]:
    """(type, subtype, q) for each parseable media range; bad ranges are skipped."""
    ranges = []
    for part in header.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(";")
        media = pieces[0].strip().lower()
        if media.count("/") != 1:
            continue
        mtype, subtype = media.split("/")
        if not mtype or not subtype:
            continue
        q = 1.0
        ok = True
        for param in pieces[1:]:
            name, _, value = param.strip().partition("=")
            if name.strip().lower() == "q":
                try:
                    q = float(value.strip())
                except ValueError:
                    ok = False
                    break
                if not 0.0 <= q <= 1.0:
                    ok = False
                    break
        if ok:
            ranges.append((mtype, subtype, q))
    return ranges


def negotiate(accept: Optional[str]) -> str:
    """Pick ``html``, ``turtle``, or ``json``; raise 406 when nothing is acceptable.

    Highest q wins, ties break on range specificity, then on the fixed order
    html > turtle > json.  A missing or unparseable header means html.
    """
    if accept is None or not accept.strip():
        return "html"
    ranges = _parse_ranges(accept)
    if not ranges:
        return "html"
    best: Optional[tuple[float, int, int, str]] = None
    for media, fmt in MEDIA_TYPES.items():
        mtype, subtype = media.split("/")
        match: Optional[tuple[int, float]] = None  # (specificity, q)
        for rtype, rsub, q in ranges:
            if rtype == mtype and rsub == subtype:
                spec = 2
            elif rtype == mtype and rsub == "*":
                spec = 1
            elif rtype == "*" and rsub == "*":
                spec = 0
            else:
                continue
            if match is None or spec > match[0]:
                match = (spec, q)
        if match is None or match[1] <= 0.0:
            continue
        candidate = (match[1], match[0], -_ORDER[fmt], fmt)
        if best is None or candidate > best:
            best = candidate
    if best is None:
        raise HttpError(406, "no acceptable representation: supported are text/html, text/turtle, application/json")
    return best[3]
