# tests/test_database/__init__.py
"""
Tests for database modules
"""
