"""Regenerate the bundled Matrix Market fixtures.

The files are checked in; this script documents how they were made. Each one
is a common family from sparse linear algebra collections, written in the
fixed-width layout of the NIST collection files (right-aligned indices,
13-digit mantissas), the form in which that corpus is distributed.

    python tools/make_fixtures.py
"""

from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp

OUT = Path(__file__).resolve().parents[1] / "src" / "layercast" / "fixtures"


def lap1d(n):
    return sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])


def lap2d(n):
    eye = sp.identity(n)
    return sp.kron(eye, lap1d(n)) + sp.kron(lap1d(n), eye)


def lap3d(n):
    eye = sp.identity(n)
    t = lap1d(n)
    return (sp.kron(sp.kron(eye, eye), t) + sp.kron(sp.kron(eye, t), eye)
            + sp.kron(sp.kron(t, eye), eye))


def fem1d(n):
    h = 1.0 / (n + 1)
    return lap1d(n) / h


def convdiff2d(n, peclet=20.0):
    h = 1.0 / (n + 1)
    eye = sp.identity(n)
    d = lap1d(n) / h**2
    upwind = sp.diags([-np.ones(n - 1), np.ones(n)], [-1, 0]) * (peclet / h)
    return sp.kron(eye, d + upwind) + sp.kron(d, eye)


def grid_graph(n):
    a = lap2d(n).tocoo()
    mask = a.row != a.col
    return sp.coo_matrix((np.ones(mask.sum()), (a.row[mask], a.col[mask])), shape=a.shape)


def incidence(rng, nodes=600, edges=1500):
    rows, cols, vals = [], [], []
    for e in range(edges):
        u, v = rng.choice(nodes, size=2, replace=False)
        rows += [u, v]
        cols += [e, e]
        vals += [1, -1]
    return sp.coo_matrix((vals, (rows, cols)), shape=(nodes, edges), dtype=np.int64)


def geometric_graph(rng, n=900, radius=0.05):
    pts = rng.random((n, 2))
    d = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    i, j = np.nonzero((d < radius) & (d > 0))
    return sp.coo_matrix((np.ones(i.size), (i, j)), shape=(n, n))


def counts(rng, docs=300, terms=500, density=0.03):
    m = sp.random(docs, terms, density=density, random_state=np.random.RandomState(7),
                  data_rvs=lambda k: rng.poisson(2.0, k) + 1)
    return m.astype(np.int64)


def elasticity_blocks(n=700):
    block = np.array([[4.0, -1.0], [-1.0, 4.0]])
    return sp.block_diag([block] * n) + sp.kron(lap1d(n), np.eye(2)) * 0.5


def write_coordinate(path, mat, symmetry, field, comment):
    m = sp.coo_matrix(mat)
    if symmetry != "general":
        keep = m.row >= m.col
        m = sp.coo_matrix((m.data[keep], (m.row[keep], m.col[keep])), shape=m.shape)
    order = np.lexsort((m.row, m.col))
    rows, cols, vals = m.row[order] + 1, m.col[order] + 1, m.data[order]
    w = len(str(max(m.shape)))
    lines = [f"%%MatrixMarket matrix coordinate {field} {symmetry}", f"% {comment}",
             f"{m.shape[0]} {m.shape[1]} {len(vals)}"]
    for i, j, v in zip(rows, cols, vals):
        if field == "pattern":
            lines.append(f"{i:>{w}d} {j:>{w}d}")
        elif field == "integer":
            lines.append(f"{i:>{w}d} {j:>{w}d} {int(v):>8d}")
        else:
            lines.append(f"{i:>{w}d} {j:>{w}d} {v: .13e}")
    path.write_text("\n".join(lines) + "\n")


def write_array(path, dense, symmetry, field, comment):
    n_rows, n_cols = dense.shape
    lines = [f"%%MatrixMarket matrix array {field} {symmetry}", f"% {comment}",
             f"{n_rows} {n_cols}"]
    for j in range(n_cols):
        start = j if symmetry == "symmetric" else 0
        for i in range(start, n_rows):
            v = dense[i, j]
            lines.append(f"{int(v):>8d}" if field == "integer" else f"{v: .13e}")
    path.write_text("\n".join(lines) + "\n")


def main():
    rng = np.random.default_rng(20030101)
    OUT.mkdir(parents=True, exist_ok=True)
    sparse = {
        "lap2d_5pt_32": (lap2d(32), "symmetric", "real"),
        "lap3d_7pt_10": (lap3d(10), "symmetric", "real"),
        "fem1d_stiffness_3000": (fem1d(3000), "symmetric", "real"),
        "convdiff2d_24": (convdiff2d(24), "general", "real"),
        "grid_graph_40": (grid_graph(40), "symmetric", "pattern"),
        "incidence_600x1500": (incidence(rng), "general", "integer"),
        "geometric_graph_900": (geometric_graph(rng), "symmetric", "pattern"),
        "term_counts_300x500": (counts(rng), "general", "integer"),
        "elasticity_blocks_700": (elasticity_blocks(), "symmetric", "real"),
        "random_sparse_800": (sp.random(800, 800, density=0.004,
                                        random_state=np.random.RandomState(3)),
                              "general", "real"),
    }
    for name, (mat, sym, field) in sparse.items():
        write_coordinate(OUT / f"{name}.mtx", mat, sym, field, name)
    n = 60
    kms = 0.5 ** np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    write_array(OUT / "kms_toeplitz_60.mtx", kms, "symmetric", "real", "KMS, rho=0.5")
    write_array(OUT / "hilbert_40.mtx", scipy.linalg.hilbert(40), "general", "real",
                "Hilbert matrix")
    pascal = np.array(scipy.linalg.pascal(30, exact=True) % 1000, dtype=np.int64)
    write_array(OUT / "pascal_int_30.mtx", pascal, "symmetric", "integer",
                "Pascal matrix mod 1000")


if __name__ == "__main__":
    main()
