"""ityness: cognitive models of English adjective nominalization and LM probe evaluation."""

__version__ = "0.1.0"
