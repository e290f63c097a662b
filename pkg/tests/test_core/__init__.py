# tests/test_core/__init__.py
"""
Tests for core modules
"""
