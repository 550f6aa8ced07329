"""
eventclock: conditional time and energy of quantum events read off a
finite-dimensional quantum clock, with a single-photon waveguide example.
"""

__version__ = "1.0.0"
