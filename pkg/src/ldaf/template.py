"""Minimal HTML template language rendered against JSON models.

Four constructs: ``{{ path }}`` (escaped), ``{{{ path }}}`` (raw),
``{% for x in path %}...{% endfor %}``, and
``{% if path %}...{% else %}...{% endif %}``.  Paths are dot-separated keys
with optional numeric list indices.  Rendering is total: missing paths give
empty output, empty loops, or the else branch.
"""
from __future__ import annotations

import html
import re
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Optional, Union

from importlib import resources as _resources

from . import jsontext


class TemplateError(ValueError):
    def __init__(self, message: str, name: str, line: int, col: int):
        super().__init__(f"{name}: {message} (line {line}, column {col})")
        self.message = message
        self.name = name
        self.line = line
        self.col = col


@dataclass
class TextNode:
    text: str


@dataclass
class InterpNode:
    path: list[str]
    raw: bool = False


@dataclass
class ForNode:
    var: str
    path: list[str]
    body: list = field(default_factory=list)


@dataclass
class IfNode:
    path: list[str]
    body: list = field(default_factory=list)
    else_body: list = field(default_factory=list)


Node = Union[TextNode, InterpNode, ForNode, IfNode]


@dataclass
class Template:
    name: str
    nodes: list[Node]


_SEGMENT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*|[0-9]+)$")


def _parse_path(expr: str, name: str, line: int, col: int) -> list[str]:
    segments = expr.split(".")
    if not expr or any(not _SEGMENT_RE.match(s) for s in segments):
        raise TemplateError(f"malformed path {expr!r}", name, line, col)
    return segments


def parse_template(source: str, name: str) -> Template:
    root: list[Node] = []
    # (node, which-branch-list) for open for/if blocks
    stack: list[tuple[Node, list[Node]]] = []
    current = root
    pos = 0
    line = 1
    line_start = 0

    def location(at: int) -> tuple[int, int]:
        return line, at - line_start + 1

    def advance_lines(chunk: str, start: int) -> None:
        nonlocal line, line_start
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = start + chunk.rfind("\n") + 1

    while pos < len(source):
        brace = source.find("{{", pos)
        percent = source.find("{%", pos)
        cut = min(x for x in (brace, percent, len(source)) if x >= 0)
        if cut > pos:
            text = source[pos:cut]
            current.append(TextNode(text))
            advance_lines(text, pos)
            pos = cut
            continue
        if pos >= len(source):
            break
        lin, col = location(pos)
        if source.startswith("{{{", pos):
            end = source.find("}}}", pos + 3)
            if end < 0:
                raise TemplateError("unterminated {{{ ... }}}", name, lin, col)
            expr = source[pos + 3 : end].strip()
            current.append(InterpNode(_parse_path(expr, name, lin, col), raw=True))
            advance_lines(source[pos : end + 3], pos)
            pos = end + 3
            continue
        if source.startswith("{{", pos):
            end = source.find("}}", pos + 2)
            if end < 0:
                raise TemplateError("unterminated {{ ... }}", name, lin, col)
            expr = source[pos + 2 : end].strip()
            current.append(InterpNode(_parse_path(expr, name, lin, col)))
            advance_lines(source[pos : end + 2], pos)
            pos = end + 2
            continue
        # {% directive %}
        end = source.find("%}", pos + 2)
        if end < 0:
            raise TemplateError("unterminated {% ... %}", name, lin, col)
        directive = source[pos + 2 : end].strip()
        advance_lines(source[pos : end + 2], pos)
        pos = end + 2
        words = directive.split()
        if not words:
            raise TemplateError("empty directive", name, lin, col)
        head = words[0]
        if head == "for":
            if len(words) != 4 or words[2] != "in" or not _SEGMENT_RE.match(words[1]) or words[1].isdigit():
                raise TemplateError(f"malformed for directive {directive!r}", name, lin, col)
            node = ForNode(words[1], _parse_path(words[3], name, lin, col))
            current.append(node)
            stack.append((node, current))
            current = node.body
        elif head == "if":
            if len(words) != 2:
                raise TemplateError(f"malformed if directive {directive!r}", name, lin, col)
            node = IfNode(_parse_path(words[1], name, lin, col))
            current.append(node)
            stack.append((node, current))
            current = node.body
        elif head == "else":
            if len(words) != 1 or not stack or not isinstance(stack[-1][0], IfNode):
                raise TemplateError("else outside if", name, lin, col)
            node = stack[-1][0]
            if current is node.else_body:
                raise TemplateError("duplicate else", name, lin, col)
            current = node.else_body
        elif head == "endfor":
            if not stack or not isinstance(stack[-1][0], ForNode):
                raise TemplateError("endfor without for", name, lin, col)
            _, current = stack.pop()
        elif head == "endif":
            if not stack or not isinstance(stack[-1][0], IfNode):
                raise TemplateError("endif without if", name, lin, col)
            _, current = stack.pop()
        else:
            raise TemplateError(f"unknown directive {head!r}", name, lin, col)
    if stack:
        node = stack[-1][0]
        kind = "for" if isinstance(node, ForNode) else "if"
        raise TemplateError(f"unclosed {kind} block", name, line, len(source) - line_start + 1)
    return Template(name, root)


_MISSING = object()


def _resolve(path: list[str], frames: list[dict], model: dict):
    head = path[0]
    value = _MISSING
    for frame in reversed(frames):
        if head in frame:
            value = frame[head]
            break
    if value is _MISSING:
        if isinstance(model, dict) and head in model:
            value = model[head]
        else:
            return _MISSING
    for segment in path[1:]:
        if isinstance(value, dict):
            if segment in value:
                value = value[segment]
            else:
                return _MISSING
        elif isinstance(value, list) and segment.isdigit():
            index = int(segment)
            if index < len(value):
                value = value[index]
            else:
                return _MISSING
        else:
            return _MISSING
    return value


def _truthy(value) -> bool:
    if value is _MISSING or value is None or value is False:
        return False
    if value == "" or (isinstance(value, (list, dict)) and not value):
        return False
    return True


def _stringify(value) -> str:
    if value is _MISSING or value is None:
        return ""
    if isinstance(value, str):
        return value
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (int, float, Decimal)):
        return jsontext.format_number(value)
    return jsontext.dumps(value)


def render(template: Template, model: dict) -> str:
    out: list[str] = []
    _render_nodes(template.nodes, [], model, out)
    return "".join(out)


def _render_nodes(nodes: list[Node], frames: list[dict], model: dict, out: list[str]) -> None:
    for node in nodes:
        if isinstance(node, TextNode):
            out.append(node.text)
        elif isinstance(node, InterpNode):
            text = _stringify(_resolve(node.path, frames, model))
            out.append(text if node.raw else html.escape(text, quote=True))
        elif isinstance(node, IfNode):
            branch = node.body if _truthy(_resolve(node.path, frames, model)) else node.else_body
            _render_nodes(branch, frames, model, out)
        else:
            value = _resolve(node.path, frames, model)
            if isinstance(value, dict):
                items = [value[k] for k in sorted(value)]
            elif isinstance(value, list):
                items = value
            else:
                items = []
            for item in items:
                frames.append({node.var: item})
                _render_nodes(node.body, frames, model, out)
                frames.pop()


class TemplateLoader:
    """Loads ``.tpl`` files from a directory, falling back to packaged defaults."""

    def __init__(self, directory: Optional[Path] = None):
        self.directory = Path(directory) if directory else None
        self._cache: dict[str, tuple[Optional[float], Template]] = {}

    def source(self, name: str) -> Optional[tuple[str, Optional[float]]]:
        if self.directory is not None:
            path = self.directory / name
            if path.is_file():
                return path.read_text("utf-8"), path.stat().st_mtime
        try:
            ref = _resources.files("ldaf").joinpath("defaults", name)
            if ref.is_file():
                return ref.read_text("utf-8"), None
        except (FileNotFoundError, ModuleNotFoundError):
            pass
        return None

    def get(self, name: str) -> Template:
        found = self.source(name)
        if found is None:
            raise KeyError(f"no template named {name!r}")
        source, mtime = found
        cached = self._cache.get(name)
        if cached is not None and cached[0] == mtime:
            return cached[1]
        template = parse_template(source, name)
        self._cache[name] = (mtime, template)
        return template

    def has(self, name: str) -> bool:
        return self.source(name) is not None
