"""
Common utilities package for uniprov
"""
