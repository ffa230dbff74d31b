"""Render figures from adacon sweep CSV outputs."""

from .figures import FigureKind, FigureSpec, SchemaError, Series, render

__all__ = ["FigureKind", "FigureSpec", "SchemaError", "Series", "render"]
