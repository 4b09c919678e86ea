"""critpick: criterion-aware preference evaluation and selection toolkit."""

__version__ = "0.1.0"
