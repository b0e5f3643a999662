"""
uniprov - unified workflow and data provenance

This package combines PROV-style workflow graphs with semiring-annotated
relational queries, linked through an ID database of measurement files.
"""

__version__ = "0.1.0"
