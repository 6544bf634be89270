"""
Built-in MAC designs.

Importing this package registers every design with the global registry.
"""

from htcsim.designs.cbsc import CbscDesign
from htcsim.designs.exact import ExactDesign
from htcsim.designs.htc import HtcDesign
from htcsim.designs.unary import UnaryDesign
from htcsim.registry import design_registry

# Register all designs
design_registry.register(HtcDesign)
design_registry.register(CbscDesign)
design_registry.register(UnaryDesign)
design_registry.register(ExactDesign)

__all__ = [
    "CbscDesign",
    "ExactDesign",
    "HtcDesign",
    "UnaryDesign",
]
