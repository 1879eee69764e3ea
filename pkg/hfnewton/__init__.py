"""Regularized Hessian-free inexact Newton methods and their benchmark harness."""

__version__ = "0.1.0"
