"""
Versioned relational store and typed values
"""
