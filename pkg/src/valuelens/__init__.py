"""Community value profiling: extract, aggregate and analyse Schwartz-value
signals from large social-media corpora."""

from valuelens.values import SCHWARTZ_VALUES, ValueVector, StanceVector

__version__ = "0.1.0"

__all__ = ["SCHWARTZ_VALUES", "ValueVector", "StanceVector", "__version__"]
