"""Photon blockade and antibunching in cavity EIT with N four-level atoms."""

__version__ = "0.1.0"

from .hilbert import HilbertSpace, build_space  # noqa: E402
from .model import ModelParams, fig2_params, fig3_params  # noqa: E402

__all__ = ["HilbertSpace", "ModelParams", "build_space", "fig2_params", "fig3_params", "__version__"]
