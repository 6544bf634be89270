"""
Design registry for MAC design discovery and lookup.

This module provides the global registry that maps design names used on the
command line and in run configs to MacDesign classes.
"""

from typing import Optional, Type

from htcsim.design import DesignOptions, MacDesign
from htcsim.errors import ConfigurationError
from htcsim.logging_config import get_logger

logger = get_logger(__name__)


class DesignRegistry:
    """Global registry for MAC designs."""

    def __init__(self):
        """Initialize empty registry."""
        self._designs: dict[str, Type[MacDesign]] = {}

    def register(self, design_class: Type[MacDesign]) -> None:
        """
        Register a design class.

        Args:
            design_class: Design class (not instance) to register
        """
        # Create temporary instance to get name
        name = design_class().name

        if name in self._designs:
            logger.warning(f"Design '{name}' already registered, overwriting")

        self._designs[name] = design_class
        logger.debug(f"Registered design: {name}")

    def unregister(self, name: str) -> None:
        """
        Unregister a design by name.

        Args:
            name: Design name
        """
        if name in self._designs:
            del self._designs[name]
            logger.debug(f"Unregistered design: {name}")

    def get_design(self, name: str, options: Optional[DesignOptions] = None) -> MacDesign:
        """
        Instantiate a design by name.

        Args:
            name: Design name
            options: Constructor options (defaults when None)

        Returns:
            Design instance

        Raises:
            ConfigurationError: If no design has that name
        """
        design_class = self._designs.get(name.lower())
        if design_class is None:
            raise ConfigurationError(f"unknown design '{name}' (available: {', '.join(self.list_designs())})")
        return design_class(options)

    def list_designs(self) -> list[str]:
        """
        List all registered design names.

        Returns:
            List of design names
        """
        return list(self._designs.keys())


# Global design registry instance
design_registry = DesignRegistry()
