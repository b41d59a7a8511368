"""Smooth relaxations of Turing machines, tempered posterior sampling over
machine codes, and RLCT estimation for program synthesis problems."""

__version__ = "0.1.0"

from .simplex import Alphabet, embed, mix, entropy

__all__ = ["Alphabet", "embed", "mix", "entropy", "__version__"]
