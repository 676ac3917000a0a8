"""Pseudo-spectral solver for the viscoelastic four-roll mill.

The conformation tensor ``c`` can be evolved directly or through its
symmetric square root ``b``. Submodules:

- :mod:`vefs.tensor_algebra` small symmetric-matrix kernels and symmetrizers
- :mod:`vefs.constitutive`   Oldroyd-B and FENE-P right-hand sides
- :mod:`vefs.spectral`       periodic Fourier operators, Stokes solve, filter
- :mod:`vefs.sim`            time stepping
- :mod:`vefs.diagnostics`    energies, error norms, SPD monitoring
- :mod:`vefs.io`             config files, snapshots, CSV
- :mod:`vefs.harness`        accuracy and stability studies
"""

from .constitutive import Formulation, ModelKind, ModelParams
from .errors import BlowUp, VefsError
from .sim import InitialCondition, SimConfig, run

__all__ = ["Formulation", "ModelKind", "ModelParams", "InitialCondition", "SimConfig",
           "run", "BlowUp", "VefsError"]
__version__ = "0.1.0"
