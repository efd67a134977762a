"""Hard/soft information fusion toolkit for next-day market movement prediction.

The package covers the full pipeline: OHLCV ingestion, technical-indicator
feature construction, daily tweet-sentiment aggregation, fused windowed
datasets, a from-scratch bidirectional LSTM classifier, evaluation metrics,
and a commission-aware trading simulation.
"""

__version__ = "0.1.0"

FORMAT_PREFIX = "hsif"
