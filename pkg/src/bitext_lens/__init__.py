"""Corpus statistics, IBM Model 1 alignment and POS induction for text/emoji bitext."""
__version__ = "0.1.0"
