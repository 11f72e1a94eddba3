"""Command-line layer: run configuration and command handlers."""
