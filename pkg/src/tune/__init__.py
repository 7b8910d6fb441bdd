"""Sample-efficient configuration autotuner.

Searches a candidate pool with a random-forest surrogate and expected
improvement, monitors runs at a fixed interval, and terminates doomed runs
early using a boosted censored (accelerated-failure-time) regressor.
"""

__version__ = "0.1.0"
