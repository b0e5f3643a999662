"""
PROV-style workflow graph
"""
