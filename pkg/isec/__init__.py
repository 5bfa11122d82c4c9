"""Quasi-isometric sections of finite fibrations."""

__version__ = "0.1.0"
