"""Geo-referencing engine: OSM-derived gazetteer, toponym detection and
disambiguation, spatial document index, and the HTTP search service."""

__version__ = "0.1.0"
