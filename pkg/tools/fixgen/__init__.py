"""Deterministic construction of the bundled fixtures.

Everything in here is build tooling: it synthesizes the lexicon, probe,
annotation, and vocabulary fixtures so that the analysis pipeline reproduces
the reference aggregates in ityness/data/reference_targets.json. Not part of
the installed package.
"""
