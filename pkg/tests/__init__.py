"""
Test suite for the Universal Detector Lab
"""
