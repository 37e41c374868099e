"""qxtorus: exact kernel for quantum cluster X-tori and their matrix algebras.

Subpackages follow the pipeline: `qtorus` (scalar arithmetic), `ncmat`
(matrices over kernel rings), `transport` (snake calculus and transport
matrices), `gdaha` (generator systems and Hecke relations), `mconv`
(quantum middle convolution), `cluster` (localization, mutation,
seizure), `basicrep` (Laurent-polynomial representation), `cli`.
"""

from .qtorus import (
    Quiver,
    Torus,
    TorusElement,
    commutation_exponent,
    multiply,
    weyl_order,
    is_central,
    root_extend,
    substitute,
    rat,
)

__all__ = [
    "Quiver",
    "Torus",
    "TorusElement",
    "commutation_exponent",
    "multiply",
    "weyl_order",
    "is_central",
    "root_extend",
    "substitute",
    "rat",
]

__version__ = "0.1.0"
