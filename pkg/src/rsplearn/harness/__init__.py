"""Experiment harness: file formats, sweeps, figures and the CLI."""
