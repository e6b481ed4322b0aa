"""Arithmetic in GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D).

Scalars are plain ints in 0..255. Vector helpers operate on ``numpy.uint8``
arrays so a whole symbol is scaled or accumulated in one call.
"""

import numpy as np

POLY = 0x11D

EXP = np.zeros(512, dtype=np.int32)
LOG = np.zeros(256, dtype=np.int32)

_x = 1
for _i in range(255):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= POLY
EXP[255:510] = EXP[:255]
del _x, _i

# Full multiplication table; row c is the map v -> c*v.
MUL = np.zeros((256, 256), dtype=np.uint8)
_nz = np.arange(1, 256)
MUL[1:, 1:] = EXP[(LOG[_nz][:, None] + LOG[_nz][None, :]) % 255]
del _nz

_exp = EXP.tolist()
_log = LOG.tolist()


def mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _exp[_log[a] + _log[b]]


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return _exp[255 - _log[a]]


def div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return _exp[(_log[a] - _log[b]) % 255]


def pow_(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return _exp[(_log[a] * e) % 255]


_xor_reduce = np.bitwise_xor.reduce


def combine(coeffs: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Return ``coeffs @ rows`` over GF(256).

    ``coeffs`` has shape (r, k), ``rows`` has shape (k, L); result is (r, L).
    """
    r, k = coeffs.shape
    if k == 0:
        return np.zeros((r, rows.shape[1]), dtype=np.uint8)
    if r * rows.shape[1] <= 4096:
        return _xor_reduce(MUL[coeffs[:, :, None], rows[None, :, :]], axis=1)
    # Column at a time: gather each coefficient's table row, then index by data.
    out = MUL[coeffs[:, 0]][:, rows[0]]
    for j in range(1, k):
        out ^= MUL[coeffs[:, j]][:, rows[j]]
    return out


def invert_matrix(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse of a square matrix over GF(256).

    Raises ``ValueError`` if the matrix is singular.
    """
    m = np.array(m, dtype=np.uint8)
    k = m.shape[0]
    aug = np.concatenate([m, np.eye(k, dtype=np.uint8)], axis=1)
    for col in range(k):
        nz = np.nonzero(aug[col:, col])[0]
        if nz.size == 0:
            raise ValueError("singular matrix")
        piv = col + int(nz[0])
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        p = int(aug[col, col])
        if p != 1:
            aug[col] = MUL[inv(p)][aug[col]]
        factors = aug[:, col].copy()
        factors[col] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            aug[hit] ^= MUL[factors[hit][:, None], aug[col][None, :]]
    return aug[:, k:]
