"""Multi-modal RGB-D salient object detection and benchmarking."""

__version__ = "0.1.0"
