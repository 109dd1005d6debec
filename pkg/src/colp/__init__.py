"""COLP: classification with optimal label permutation and causal direction discovery."""
