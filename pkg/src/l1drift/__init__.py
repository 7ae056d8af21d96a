"""Minimum L1-norm drift estimation for Ornstein-Uhlenbeck processes driven by Gaussian noise."""

__version__ = "0.1.0"
