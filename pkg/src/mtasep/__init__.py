"""Multi-type TASEP laboratory: exact finite-time probabilities, Monte
Carlo samplers, a certified CTMC oracle, closed-form limit laws, and a
duality-verification harness."""

__version__ = "0.1.0"
