"""Desk-scale stand-in for the multi-modal preprocessing and group classifier.

Generates synthetic LiDAR/radar/GPS frames around exported UE traces, runs
static clutter reduction and PCA feature extraction, trains a small softmax
group classifier, and exports predictions in the beam simulator's
prediction-stream CSV format.
"""

__version__ = "0.1.0"
