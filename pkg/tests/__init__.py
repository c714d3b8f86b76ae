"""
Tests for the gimvip solver package.
"""
