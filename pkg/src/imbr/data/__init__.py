"""Bundled resources."""
