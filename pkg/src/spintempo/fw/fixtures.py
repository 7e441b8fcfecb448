"""Operator identities as printed, kept as DSL text.

These strings are test oracles.  They are transcribed once from the printed
formulas, parsed on demand, and never produced by the pipeline they check.
Cross products are written out with ``eps``: ``(grad phi x sigma) . p`` is
``sum[i,j,k](eps(i,j,k)*D(j,phi)*sigma(k)*p(i))`` and ``(curl g)_k`` is
``sum[i,j](eps(k,i,j)*D(i,g(j)))``.
"""

from __future__ import annotations

from functools import lru_cache

from ..opcore import DEFAULT_WINDOW, OperatorExpr, Window, parse_operator

HAMILTONIAN = """
m*beta
+ (1 + phi)*sum[j](alpha(j)*p(j))
+ m*beta*phi
- 1/4*sum[k,i,j](eps(k,i,j)*D(i,g(j))*sigma(k))
- sum[j](g(j)*p(j))
"""

# U H U^dagger, four-component, to order 1/m^2
UHU = """
m*beta + m*beta*phi
- 1/4*sum[k,i,j](eps(k,i,j)*D(i,g(j))*sigma(k))
- sum[j](g(j)*p(j))
+ 1/(2*m)*beta*(1 + phi)*p^2
- 1/(4*m)*beta*sum[i,j,k](eps(i,j,k)*D(j,phi)*sigma(k)*p(i))
+ 1/(4*m)*beta*sum[i,j,k,l](eps(i,j,k)*D(i,h(j,l))*p(l)*sigma(k))
+ 1/(16*m^2)*sum[i,j,k,l](eps(i,j,k)*((D(j,g(l)) + D(l,g(j)))*p(l)*p(i)
                                     + p(l)*p(i)*(D(j,g(l)) + D(l,g(j))))*sigma(k))
"""

H_FW = """
m + m*phi
- 1/4*sum[k,i,j](eps(k,i,j)*D(i,g(j))*sigma(k))
- sum[j](g(j)*p(j))
+ 1/(2*m)*(1 + phi)*p^2
- 1/(4*m)*sum[i,j,k](eps(i,j,k)*D(j,phi)*sigma(k)*p(i))
+ 1/(4*m)*sum[i,j,k,l](eps(i,j,k)*D(i,h(j,l))*p(l)*sigma(k))
+ 1/(16*m^2)*sum[i,j,k,l](eps(i,j,k)*((D(j,g(l)) + D(l,g(j)))*p(l)*p(i)
                                     + p(l)*p(i)*(D(j,g(l)) + D(l,g(j))))*sigma(k))
"""

# even part of U (1 + phi) beta U^dagger
TRANSFORMED_BETA = """
(1 + phi)*beta
- 1/(2*m^2)*beta*(1 + phi)*p^2
+ 1/(4*m^2)*beta*sum[i,j,k](eps(i,j,k)*D(j,phi)*sigma(k)*p(i))
+ 1/(4*m^2)*beta*sum[i,j,k,l](eps(j,k,l)*D(j,h(i,l))*sigma(k)*p(i))
"""

TEMPO = """
1 + phi
- 1/(2*m^2)*(1 + phi)*p^2
+ 1/(4*m^2)*sum[i,j,k](eps(i,j,k)*D(j,phi)*sigma(k)*p(i))
+ 1/(4*m^2)*sum[i,j,k,l](eps(j,k,l)*D(j,h(i,l))*sigma(k)*p(i))
"""

TEMPO_SQUARED = """
1 + 2*phi
- 1/m^2*(1 + 2*phi)*p^2
+ i/m^2*sum[j](D(j,phi)*p(j))
+ 1/(2*m^2)*sum[i,j,k](eps(i,j,k)*D(j,phi)*sigma(k)*p(i))
+ 1/(2*m^2)*sum[i,j,k,l](eps(j,k,l)*D(j,h(i,l))*sigma(k)*p(i))
"""

# free index i (bind with {"i": 1..3})
VELOCITY = """
- g(i)
+ 1/m*(1 + phi)*p(i)
+ 1/(4*m)*sum[j](p(j)*h(i,j) + h(i,j)*p(j))
- 1/(4*m)*sum[a,b](eps(i,a,b)*D(a,phi)*sigma(b))
- 1/(4*m)*sum[j,k,l](eps(j,k,l)*D(j,h(i,l))*sigma(k))
+ 1/(16*m^2)*sum[j,k,l](eps(i,j,k)*((D(j,g(l)) + D(l,g(j)))*p(l)
                                   + p(l)*(D(j,g(l)) + D(l,g(j))))*sigma(k))
+ 1/(16*m^2)*sum[j,k,l](eps(j,k,l)*((D(j,g(i)) + D(i,g(j)))*p(l)
                                   + p(l)*(D(j,g(i)) + D(i,g(j))))*sigma(k))
"""

MOMENTUM_COMMUTATOR = """
1/2*sum[l]((-D(1,h(2,l)) + D(2,h(1,l)))*d(l))
"""

FIXTURES = {
    "H": HAMILTONIAN,
    "UHU": UHU,
    "H_FW": H_FW,
    "transformed_beta": TRANSFORMED_BETA,
    "tempo": TEMPO,
    "tempo_squared": TEMPO_SQUARED,
    "xdot1": VELOCITY,
    "xdot2": VELOCITY,
    "xdot3": VELOCITY,
    "p1p2": MOMENTUM_COMMUTATOR,
}

_BINDINGS = {"xdot1": {"i": 1}, "xdot2": {"i": 2}, "xdot3": {"i": 3}}


@lru_cache(maxsize=None)
def fixture(name: str, window: Window = DEFAULT_WINDOW) -> OperatorExpr:
    """Parsed fixture by name (see ``FIXTURES``)."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
    return parse_operator(FIXTURES[name], _BINDINGS.get(name), window)
