"""
Application components for the gouy matter-wave toolkit.

This package contains the main application components:
- Core: packet evolution, partial coherence, experiment analysis and the
  numerical oracle
- CLI: run configuration and the command handlers behind main.py
"""
