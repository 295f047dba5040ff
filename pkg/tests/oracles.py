"""Independent symbolic oracles (sympy) shared by the test modules."""

import numpy as np
import sympy as sp

X = sp.symbols("x1 x2 x3")


def symbolic_christoffel_ricci(g):
    """Christoffel symbols Gamma^a_bc and Ricci R_bd of a sympy 3x3 metric in X."""
    ginv = g.inv()
    gam = [[[sp.simplify(sum(ginv[a, e] * (sp.diff(g[e, b], X[c]) + sp.diff(g[e, c], X[b])
                                            - sp.diff(g[b, c], X[e])) for e in range(3)) / 2)
             for c in range(3)] for b in range(3)] for a in range(3)]
    ric = sp.zeros(3, 3)
    for b in range(3):
        for d in range(3):
            ric[b, d] = sp.simplify(
                sum(sp.diff(gam[a][d][b], X[a]) for a in range(3))
                - sum(sp.diff(gam[a][a][b], X[d]) for a in range(3))
                + sum(gam[a][a][e] * gam[e][d][b] for a in range(3) for e in range(3))
                - sum(gam[a][d][e] * gam[e][a][b] for a in range(3) for e in range(3)))
    return gam, ric


def lambdify_at(expr_grid, p):
    f = sp.lambdify(X, expr_grid, "numpy")
    return np.array(f(*p), dtype=float)
