"""
spcimpute - multiple imputation of potential outcomes under a specified
partial correlation
"""

__version__ = "1.0.0"
