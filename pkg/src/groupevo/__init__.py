"""Group evolution discovery (GED) and next-event prediction for temporal social networks."""

__version__ = "0.1.0"
