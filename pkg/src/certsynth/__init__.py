"""Data-driven synthesis of stability and safety certificates.

From a single persistently excited input-state trajectory of an unknown
system, synthesize control Lyapunov functions or control barrier
certificates with level sets, plus the corresponding state-feedback
controllers, for continuous/discrete x linear/polynomial system classes.
"""

__version__ = "0.1.0"
