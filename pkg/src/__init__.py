"""
QINR Autoencoders
Hybrid quantum-classical autoencoders with a simulated data-reuploading decoder
"""

__version__ = "1.0.0"
