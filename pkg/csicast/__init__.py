"""
csicast
-------
Workbench for channel state information (CSI) prediction: synthetic
MIMO-OFDM channels, noise models, the CSI-4CAST predictor with its
baselines, training and the scenario-wise evaluation protocol.
"""

__version__ = "1.0"
