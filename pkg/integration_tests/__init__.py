"""End-to-end runs of the training and evaluation pipeline."""
