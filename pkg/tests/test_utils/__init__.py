# tests/test_utils/__init__.py
"""
Tests for utility modules
"""
