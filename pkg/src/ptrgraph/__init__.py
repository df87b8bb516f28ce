"""ptrgraph: a graph-rewriting simulator of C pointer semantics.

Memory states are typed attributed graphs; statements of a small C subset
execute as graph rewrite rules; well-formedness and referential-integrity
constraints are checked continuously; an interactive stepper explores
what-if rule applications.
"""

from ptrgraph._kernel import backend as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
