"""Counter-machine workbench and exact radix-conversion laboratory."""

__version__ = "0.1.0"
