"""Command-line experiment runner (``density-lab``)."""
