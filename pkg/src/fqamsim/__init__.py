"""System-level simulator for QAM/FQAM resource partitioning in interference-limited cellular downlinks."""

__version__ = "0.1.0"
