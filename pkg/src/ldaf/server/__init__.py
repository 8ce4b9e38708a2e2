"""HTTP application over the dataset: negotiation, CRUD, auth, default resources."""

from .app import LinkedDataApp, make_app, serve
from .auth import SESSION_COOKIE, SessionStore, hash_password, verify_password
from .config import AppConfig, CollectionSpec, ConfigError, load_config
from .negotiate import CONTENT_TYPES, negotiate
from .web import HandlerRegistry, HttpError, RegistryError, Request, Response

__all__ = [
    "AppConfig",
    "CollectionSpec",
    "ConfigError",
    "CONTENT_TYPES",
    "HandlerRegistry",
    "HttpError",
    "LinkedDataApp",
    "RegistryError",
    "Request",
    "Response",
    "SESSION_COOKIE",
    "SessionStore",
    "hash_password",
    "load_config",
    "make_app",
    "negotiate",
    "serve",
    "verify_password",
]
