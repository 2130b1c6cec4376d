"""Mod-p cohomology of finitely presented groups along p-congruence towers."""

__version__ = "0.1.0"
