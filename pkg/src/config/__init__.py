"""
Configuration package for the gouy toolkit.

This package contains configuration modules that centralize settings
used throughout the application.
"""
