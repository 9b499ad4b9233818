"""Map-free reactive 3D navigation toolkit.

Ray-based obstacle avoidance policies with a metric-weighted combination
rule, a geodesic-field expert for self-supervision, a small learned model
that biases the goal direction, and a benchmark harness.
"""

__version__ = "0.1.0"
