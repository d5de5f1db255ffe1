"""Learned 5-way spatial-relation classifier for the scenediff engine.

Trains a compact CNN on simulator-emitted crops (RGB + two bbox masks,
five input channels) and serves predictions over newline-delimited JSON
on stdin/stdout.
"""

__version__ = "0.1.0"

LABELS = ("A_IN_B", "B_IN_A", "A_ON_B", "B_ON_A", "UNRELATED")
INPUT_SIZE = 128
