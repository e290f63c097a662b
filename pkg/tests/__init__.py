# tests/__init__.py
"""
Test suite for the GPU cluster scheduling simulator

Run with `python tests/test_runner.py`, or
`python -m unittest discover -s tests -t tests`.
"""
