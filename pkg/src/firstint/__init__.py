"""Local first integrals of analytic vector fields with one zero eigenvalue.

Exact formal construction, singular-curve tests, a certified small-divisor
divergence demonstration and a floating-point conservation harness.
"""

__version__ = "0.1.0"
