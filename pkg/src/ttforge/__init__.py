"""Train track maps on the rose, ideal Whitehead graphs, and admissible map diagrams."""

__version__ = "0.1.0"
