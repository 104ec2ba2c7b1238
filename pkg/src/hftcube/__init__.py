"""Exact cubical models of finite hierarchical families of trees."""

__version__ = "0.1.0"
