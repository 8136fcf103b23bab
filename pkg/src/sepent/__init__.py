"""Entailment checking for symbolic heaps with compositional inductive predicates."""

__version__ = "0.1.0"
