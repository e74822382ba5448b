"""Top-level package for pykoszul."""
import importlib.metadata as importlib_metadata

__author__ = """pykoszul developers"""
__version__ = importlib_metadata.version(__name__)
