"""Tiny numpy-only temporal-convolutional classifier with exact hand-written gradients."""
