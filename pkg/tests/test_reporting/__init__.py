# tests/test_reporting/__init__.py
"""
Tests for reporting modules
"""
