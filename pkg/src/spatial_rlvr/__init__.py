"""Verifiable spatial-reasoning QA synthesis and SG-RLVR reward machinery."""

__version__ = "0.1.0"
