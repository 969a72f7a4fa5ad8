"""Cross-domain task-oriented dialogue simulation toolkit."""

__version__ = "0.1.0"
