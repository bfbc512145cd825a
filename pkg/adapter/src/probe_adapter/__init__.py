"""probe-adapter: derivative log-probabilities and forced choices from causal LMs."""

__version__ = "0.1.0"
