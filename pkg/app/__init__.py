"""
Universal Detector Lab

Construction, validation and Monte Carlo simulation of universal quantum detectors.
"""

__version__ = "1.0.0"
__author__ = "Universal Detector Lab Team"
__description__ = "Universal POVMs on system-ancilla spaces with classical data processing"
