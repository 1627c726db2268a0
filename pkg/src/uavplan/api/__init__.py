"""HTTP service layer: pydantic schemas, handlers, and the FastAPI app."""

from .app import app

__all__ = ["app"]
