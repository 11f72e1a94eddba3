"""
Utility modules for the gouy toolkit.

This package contains utility modules that support the application:
- curve_files: CSV tables with metadata headers and the width dataset format
- svg_plot: dependency-free SVG line plots for the curve files
"""
