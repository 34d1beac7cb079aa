"""Benchmark environments package."""
