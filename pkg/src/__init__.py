"""hk-twistor - twistor reconstruction of pseudo-hyper-Kähler structures."""

__version__ = "0.1.0"
