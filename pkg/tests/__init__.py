"""Unit test package for pykoszul."""
