"""
Monte Carlo attack/detection experiments and their result files.
"""
