"""Benchmark harness: file formats, synthetic data, metrics, timing and CLI."""
