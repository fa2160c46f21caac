"""rulefeat: exhaustive supervised rule mining, rule-derived local
features, and an interpretable-classification benchmark harness."""

__version__ = "0.1.0"
