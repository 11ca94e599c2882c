"""Finite-dimensional Herglotz representations, Naimark dilations and Clark spectra.

Submodules
----------
linalg_core         orthonormal frames, unitary eigendecomposition, PSD roots
ov_measures         atomic operator-valued measures on the circle
contractions        defect data and characteristic functions
compression_engine  compression of a unitary to a subspace
naimark_dilation    dilation of POVMs and its certification
clark_spectra       unitary perturbations of partial isometries
cli                 batch command line front end
"""
from importlib import resources

__version__ = "0.1.0"


def fixture_path(name: str = "shift2.json"):
    """Path of a bundled input fixture."""
    return resources.files(__name__).joinpath("fixtures", name)
