"""
Source package initialization.
"""
