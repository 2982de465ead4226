"""branchbook: a branch & merge computational notebook engine.

Stages hold alternative windows of cells; branching forks the interpreter
environment, and downstream windows show one result per combination of
upstream choices.
"""
__version__ = "0.1.0"
