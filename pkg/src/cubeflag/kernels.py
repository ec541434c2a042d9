"""Integer kernels for orbit enumeration over two-colour words.

A word over ``nbits`` free positions is packed into an int64 with position
``k`` at bit ``nbits - 1 - k`` and Red encoded as 1, so integer order equals
lexicographic word order under Blue < Red. A group acting on positions is
given by byte lookup tables ``tables[g, b, byte]`` whose OR over the bytes of
a code is the image code.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

NUMPY_MAX_BITS = 26
NUMBA_MAX_BITS = 32
_CHUNK = 1 << 21


class CapacityError(RuntimeError):
    """Requested enumeration exceeds what this backend can hold."""


def build_tables(position_perms: np.ndarray, nbits: int) -> np.ndarray:
    """Lookup tables for permutations of ``nbits`` positions.

    ``position_perms[g, k]`` is where position ``k`` goes under element ``g``.
    """
    perms = np.asarray(position_perms, dtype=np.int64)
    ngroup = perms.shape[0]
    nbytes = max(1, (nbits + 7) // 8)
    tables = np.zeros((ngroup, nbytes, 256), dtype=np.int64)
    vals = np.arange(256)
    for g in range(ngroup):
        for b in range(nbytes):
            for j in range(8):
                bit = 8 * b + j
                if bit >= nbits:
                    break
                src = nbits - 1 - bit
                dst_bit = nbits - 1 - perms[g, src]
                tables[g, b, (vals >> j) & 1 == 1] |= 1 << int(dst_bit)
    return tables


def apply_tables(codes: np.ndarray, tables: np.ndarray, g: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.zeros_like(codes)
    for b in range(tables.shape[1]):
        out |= tables[g, b][(codes >> (8 * b)) & 255]
    return out


# -- numpy path -------------------------------------------------------------

def _free_mask_np(codes, masks):
    ok = np.ones(codes.shape, dtype=bool)
    for m in masks:
        ok &= (codes & m) != 0
    return ok


def _canonical_np(codes, tables):
    best = apply_tables(codes, tables, 0)
    for g in range(1, tables.shape[0]):
        np.minimum(best, apply_tables(codes, tables, g), out=best)
    return best


def _orbit_reps_np(nbits, tables, masks):
    if nbits > NUMPY_MAX_BITS:
        raise CapacityError(
            f"{nbits}-bit scan exceeds the numpy backend limit of {NUMPY_MAX_BITS} bits"
        )
    reps = []
    total = 1 << nbits
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        codes = codes[_free_mask_np(codes, masks)]
        if codes.size:
            reps.append(codes[_canonical_np(codes, tables) == codes])
    return np.concatenate(reps) if reps else np.zeros(0, dtype=np.int64)


# -- numba path -------------------------------------------------------------

@njit(cache=True)
def _free_mask_nb(codes, masks):
    out = np.ones(codes.shape[0], dtype=np.bool_)
    for i in range(codes.shape[0]):
        x = codes[i]
        for m in masks:
            if x & m == 0:
                out[i] = False
                break
    return out


@njit(cache=True)
def _canonical_nb(codes, tables):
    ngroup, nbytes, _ = tables.shape
    out = np.empty_like(codes)
    for i in range(codes.shape[0]):
        x = codes[i]
        best = x
        for g in range(ngroup):
            y = 0
            for b in range(nbytes):
                y |= tables[g, b, (x >> (8 * b)) & 255]
            if y < best:
                best = y
        out[i] = best
    return out


@njit(cache=True)
def _orbit_reps_nb(nbits, tables, masks):
    total = np.int64(1) << nbits
    visited = np.zeros((total >> 3) + 1, dtype=np.uint8)
    ngroup, nbytes, _ = tables.shape
    out = np.empty(1024, dtype=np.int64)
    count = 0
    for x in range(total):
        if (visited[x >> 3] >> (x & 7)) & 1:
            continue
        free = True
        for m in masks:
            if x & m == 0:
                free = False
                break
        if not free:
            continue
        if count == out.shape[0]:
            grown = np.empty(2 * count, dtype=np.int64)
            grown[:count] = out
            out = grown
        out[count] = x
        count += 1
        for g in range(ngroup):
            y = 0
            for b in range(nbytes):
                y |= tables[g, b, (x >> (8 * b)) & 255]
            visited[y >> 3] |= np.uint8(1 << (y & 7))
    return out[:count]


# -- dispatch ---------------------------------------------------------------

def free_mask(codes, masks) -> np.ndarray:
    """True where a code meets every mask, i.e. no forbidden pattern is all blue."""
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if USE_NUMBA:
        return _free_mask_nb(codes, masks)
    return _free_mask_np(codes, masks)


def canonical_codes(codes, tables) -> np.ndarray:
    """Minimum image of each code over the group."""
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    if USE_NUMBA:
        return _canonical_nb(codes, tables)
    return _canonical_np(codes, tables)


def orbit_representatives(nbits: int, tables, masks) -> np.ndarray:
    """Smallest member of every orbit of mask-free codes, ascending."""
    masks = np.ascontiguousarray(masks, dtype=np.int64)
    if USE_NUMBA:
        if nbits > NUMBA_MAX_BITS:
            raise CapacityError(
                f"{nbits}-bit scan exceeds the numba backend limit of {NUMBA_MAX_BITS} bits"
            )
        return _orbit_reps_nb(np.int64(nbits), tables, masks)
    return _orbit_reps_np(nbits, tables, masks)
