"""
Tests for uniprov
"""
