"""Request/response types, the handler registry, and small response helpers."""
from __future__ import annotations

from dataclasses import dataclass, field
from http.client import responses as _REASONS
from http.cookies import SimpleCookie
from typing import Callable, Optional
from urllib.parse import parse_qsl, unquote

from .. import jsontext
from ..terms import Iri


class HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class RegistryError(Exception):
    pass


@dataclass
class Request:
    method: str
    path: str
    query: dict[str, str] = field(default_factory=dict)
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""
    format: str = "html"
    user: Optional[Iri] = None
    session_token: Optional[str] = None

    @property
    def content_type(self) -> str:
        return self.headers.get("content-type", "").split(";")[0].strip().lower()

    def cookie(self, name: str) -> Optional[str]:
        raw = self.headers.get("cookie")
        if not raw:
            return None
        jar = SimpleCookie()
        try:
            jar.load(raw)
        except Exception:
            return None
        morsel = jar.get(name)
        return morsel.value if morsel else None

    def json(self):
        if not self.body:
            raise HttpError(400, "request body is empty")
        try:
            return jsontext.loads(self.body)
        except ValueError as exc:
            raise HttpError(400, f"malformed JSON: {exc}") from None

    def form(self) -> dict[str, str]:
        try:
            text = self.body.decode("utf-8")
        except UnicodeDecodeError:
            raise HttpError(400, "form body is not UTF-8") from None
        return dict(parse_qsl(text, keep_blank_values=True))

    def int_param(self, name: str, default: int, minimum: int = 1) -> int:
        raw = self.query.get(name)
        if raw is None or raw == "":
            return default
        try:
            value = int(raw)
        except ValueError:
            raise HttpError(400, f"{name} must be an integer") from None
        if value < minimum:
            raise HttpError(400, f"{name} must be at least {minimum}")
        return value


@dataclass
class Response:
    status: int = 200
    headers: list[tuple[str, str]] = field(default_factory=list)
    body: bytes = b""

    def header(self, name: str) -> Optional[str]:
        lowered = name.lower()
        for key, value in self.headers:
            if key.lower() == lowered:
                return value
        return None

    @property
    def reason(self) -> str:
        return _REASONS.get(self.status, "Unknown")


Handler = Callable[[Request], Response]


def json_response(value, status: int = 200, headers: Optional[list[tuple[str, str]]] = None) -> Response:
    hdrs = [("Content-Type", "application/json")] + (headers or [])
    return Response(status, hdrs, jsontext.dump_bytes(value))


def html_response(text: str, status: int = 200, headers: Optional[list[tuple[str, str]]] = None) -> Response:
    hdrs = [("Content-Type", "text/html; charset=utf-8")] + (headers or [])
    return Response(status, hdrs, text.encode("utf-8"))


def turtle_response(text: str, status: int = 200, headers: Optional[list[tuple[str, str]]] = None) -> Response:
    hdrs = [("Content-Type", "text/turtle; charset=utf-8")] + (headers or [])
    return Response(status, hdrs, text.encode("utf-8"))


def redirect(location: str, status: int = 302) -> Response:
    return Response(status, [("Location", location)], b"")


def no_content() -> Response:
    return Response(204, [], b"")


class HandlerRegistry:
    """Dispatches request paths to handlers by longest registered prefix."""

    def __init__(self) -> None:
        self._handlers: dict[str, Handler] = {}

    def register(self, prefix: str, handler: Handler) -> None:
        if not prefix.startswith("/"):
            raise RegistryError(f"prefix must start with '/': {prefix!r}")
        if prefix != "/" and prefix.endswith("/"):
            prefix = prefix.rstrip("/")
        if prefix in self._handlers:
            raise RegistryError(f"duplicate handler prefix {prefix!r}")
        self._handlers[prefix] = handler

    def prefixes(self) -> list[str]:
        return sorted(self._handlers)

    def dispatch(self, path: str) -> Optional[Handler]:
        best: Optional[str] = None
        for prefix in self._handlers:
            if prefix == "/":
                matches = True
            else:
                matches = path == prefix or path.startswith(prefix + "/")
            if matches and (best is None or len(prefix) > len(best)):
                best = prefix
        return self._handlers[best] if best is not None else None


def split_path(path: str) -> list[str]:
    return [unquote(part) for part in path.strip("/").split("/") if part]
