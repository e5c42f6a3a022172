"""HTTP service exposing the experiment engine."""

from .app import app, create_app

__all__ = ["app", "create_app"]
