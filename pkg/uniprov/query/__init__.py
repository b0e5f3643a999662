"""
Query language, annotated evaluation and why-not explanations
"""
