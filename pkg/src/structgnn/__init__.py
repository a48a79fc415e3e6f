"""Lipophilicity prediction with a directed message passing encoder
and a functional-group substructure encoder."""

__version__ = "0.1.0"
