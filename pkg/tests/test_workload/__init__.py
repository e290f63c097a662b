# tests/test_workload/__init__.py
"""
Tests for workload modules
"""
