"""Exact simulation of consecutive projective measurements without collapse.

Two independent computation paths are provided: :mod:`chainwatch.chain`
evaluates detector statistics from the classical chain of transition
probabilities, and :mod:`chainwatch.qstate` builds the joint pure state of
the system and every detector and takes partial traces.
"""

__version__ = "0.1.0"
