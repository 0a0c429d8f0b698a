"""Evaluation harness for converted speech.

This package provides tools for:
- Per-pair objective metrics (PCC, embedding MAE, SVM emotion accuracy, CER)
- Anonymisation scoring (EER) through a pluggable speaker verifier
- Grouped reports and baseline/candidate comparisons
"""
