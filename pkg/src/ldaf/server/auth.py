"""Password hashing and the in-memory session store."""
from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import time
from dataclasses import dataclass
from typing import Optional

from ..terms import Iri

PBKDF2_ITERATIONS = 120_000
SALT_BYTES = 16
SESSION_COOKIE = "ldaf_session"


def new_salt() -> bytes:
    return secrets.token_bytes(SALT_BYTES)


def hash_password(password: str, salt: bytes, iterations: int = PBKDF2_ITERATIONS) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)


def verify_password(password: str, salt: bytes, iterations: int, expected: bytes) -> bool:
    return hmac.compare_digest(hash_password(password, salt, iterations), expected)


@dataclass
class Session:
    token: str
    user: Iri
    expires_at: float


class SessionStore:
    """Token-to-user map; expired entries behave as absent."""

    def __init__(self, ttl_minutes: int):
        self.ttl_seconds = ttl_minutes * 60
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, user: Iri) -> Session:
        session = Session(secrets.token_hex(16), user, time.time() + self.ttl_seconds)
        with self._lock:
            self._sessions[session.token] = session
        return session

    def resolve(self, token: Optional[str]) -> Optional[Iri]:
        if not token:
            return None
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at <= time.time():
                del self._sessions[token]
                return None
            return session.user

    def revoke(self, token: Optional[str]) -> None:
        if not token:
            return
        with self._lock:
            self._sessions.pop(token, None)

    def purge(self) -> None:
        now = time.time()
        with self._lock:
            for token in [t for t, s in self._sessions.items() if s.expires_at <= now]:
                del self._sessions[token]
