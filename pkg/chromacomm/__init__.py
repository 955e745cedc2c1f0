"""
chromacomm - two-party communication protocols for (Delta+1)-coloring
"""
try:
    from importlib.metadata import version
    __version__ = version("chromacomm")
except Exception:
    __version__ = "dev"
