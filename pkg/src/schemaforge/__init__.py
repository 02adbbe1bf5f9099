"""Corpus forge for schema-dependency pre-training of table semantic parsers."""

__version__ = "0.1.0"
