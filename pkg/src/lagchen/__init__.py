"""Non-minimal Lagrangian submanifolds of CP^3(4) with equality in the improved Chen inequality.

Builds the immersions from a horizontal minimal surface in S^5 and a solution
of the (b1, lam2) profile system, then checks their geometry numerically.
"""
__version__ = "0.1.0"
