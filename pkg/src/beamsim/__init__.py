"""Two-step mm-wave beam management simulator.

Step 1 narrows the 64-beam codebook to an 8-beam group through a pluggable
group predictor; step 2 picks the beam within the group with tabular
Q-learning against threshold rewards derived from link-level throughput.
"""

__version__ = "0.1.0"
