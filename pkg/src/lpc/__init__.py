"""Linear probabilistic classifiers: minimax 0-1 loss learning over polyhedral uncertainty sets."""
__version__ = "0.1.0"
