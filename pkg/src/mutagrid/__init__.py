"""mutagrid: distributed mutation analysis for an embedded mini-language."""

__version__ = "0.1.0"
