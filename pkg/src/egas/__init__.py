"""Correctness kernels of finite abstract domains, partition simplification
of abstract transition systems, and counterexample-guided refinement."""

from importlib.resources import files

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled fixture file (``sign.lat``, ``fig1.ts``, ...)."""
    return files(__name__) / "data" / name
