"""Example IrGL programs shipped with the package."""

from pathlib import Path

DIR = Path(__file__).parent
NAMES = ("bfs", "boruvka", "dmr", "dynamic_pipe")


def path(name: str) -> Path:
    """Path of corpus program ``name`` (without the .irgl suffix)."""
    return DIR / f"{name}.irgl"
