"""Radio-tomography fingerprint classification toolkit."""
__version__ = "0.1.0"
