"""Exact oracle package."""
