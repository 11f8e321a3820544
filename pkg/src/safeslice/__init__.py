"""Safe DRL inter-slice resource allocation lab.

Packet-level slicing simulator, risk-sensitive reward, learned-cost safety
layer, A2C / SAC-Lagrangian agents, and the experiment harness tying them
together.
"""

__version__ = "0.1.0"
