"""
Collusion-resistance bounds and brute-force oracles.
"""
