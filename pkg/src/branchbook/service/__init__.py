"""Service API: command queue, snapshots, and the ordered event stream."""
from .app import create_app
from .session import NotebookSession

__all__ = ["create_app", "NotebookSession"]
