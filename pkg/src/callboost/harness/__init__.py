"""Evaluation harness: synthetic test sets, the boosting pipeline and scoring."""
