"""Two-site Hubbard models of atom pairs in a double-well trap."""

__version__ = "0.1.0"
