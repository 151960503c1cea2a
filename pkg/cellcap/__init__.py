"""Alpha-stable interference and cooperative downlink capacity toolkit."""

__version__ = "1.0.0"
