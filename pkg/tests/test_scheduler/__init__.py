# tests/test_scheduler/__init__.py
"""
Tests for scheduler modules
"""
