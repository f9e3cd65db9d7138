"""Thermometry with a dispersively coupled N00N Mach-Zehnder interferometer."""

__version__ = "0.1.0"
