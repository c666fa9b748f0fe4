"""Grammar-controlled vector addition systems toolkit.

Submodules: :mod:`ordinal` (CNF ordinals and the fast-growing hierarchy),
:mod:`gvas` (the grammar model), :mod:`reach` (bounded reachability),
:mod:`flowtree` (tree ordering and amalgamation), :mod:`pvas` (pushdown
view), :mod:`setops` (definable predicates), :mod:`weakcomp` (weak
computers), :mod:`fastgrowing` (hierarchy computers), :mod:`cli`.
"""

from .gvas import Gvas, Transition
from .ordinal import Ordinal

__all__ = ["Gvas", "Ordinal", "Transition"]
__version__ = "0.1.0"
