"""Bundled example matrices."""

from importlib import resources

from ..proximity import ProximityMatrix, parse_proximity


def load(name: str) -> ProximityMatrix:
    """Load a bundled labeled-square CSV fixture, e.g. "uscities"."""
    text = resources.files(__name__).joinpath(f"{name}.csv").read_text("utf-8")
    return parse_proximity(text, "labeled-square-csv", "distance")


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.csv")
