"""Figure scripts for the lattice-walk CSV outputs.

Every script here consumes CSV files (and JSON fit reports) produced by
the simulation command line and renders one figure class.  Nothing in
this package computes physics: measured curves, error bars, and theory
overlays all come straight from the input columns.
"""

from importlib.resources import files


def sample_path(name: str) -> str:
    """Absolute path of one of the shipped sample data files."""
    return str(files("walkplots").joinpath("data", name))
