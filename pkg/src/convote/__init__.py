"""Collective support/oppose classification of congressional debate speech."""
__version__ = "0.1.0"
