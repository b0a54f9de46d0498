from __future__ import annotations

__all__ = [
    "artifacts",
    "cli",
    "config",
    "config_service",
    "core",
    "errors",
    "expsums",
    "models",
    "reporter",
    "smoothing",
    "solver",
    "util",
    "vaughan",
]
