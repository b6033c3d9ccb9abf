"""Generator-based Hankel/Toeplitz representations and structural operators.

Everything here operates on generators (the Õ(n) descriptions) wherever
possible; dense matrices appear only as desk-scale oracles. All values are
immutable after construction and all functions are pure.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError, PreconditionError, SizeCapError

DESK_CAP = 4096

# StructuredOp tags
EXCHANGE = "exchange"            # J
SHIFT_DOWN = "shift_down"        # lower shift
SHIFT_UP = "shift_up"            # its transpose
FOLD = "fold_unitary"            # S = (1+i)/2 I + (1-i)/2 J
BLOCK_FOLD = "block_fold"        # block-diagonal S at a recursion level
MASK_E = "mask_e"                # zero the first 2^(t-1) coordinates
SWAP_F = "swap_f"                # swap adjacent chunks of 2^(t-1) coordinates
BLOCK_SHIFT = "block_shift"      # block-diagonal lower shift, block size q
BLOCK_SHIFT_UP = "block_shift_up"

_ALL_TAGS = (EXCHANGE, SHIFT_DOWN, SHIFT_UP, FOLD, BLOCK_FOLD, MASK_E, SWAP_F,
             BLOCK_SHIFT, BLOCK_SHIFT_UP)


def _as_vector(x, length, what="vector"):
    x = np.asarray(x)
    if x.ndim == 1 and x.shape[0] != length:
        raise DimensionError(f"{what} has length {x.shape[0]}, expected {length}")
    if x.ndim == 2 and x.shape[0] != length:
        raise DimensionError(f"{what} has {x.shape[0]} rows, expected {length}")
    if x.ndim > 2:
        raise DimensionError(f"{what} must be 1-D or 2-D")
    return x


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise PreconditionError(f"{what} contains non-finite entries")


@dataclass(frozen=True, eq=False)
class HankelGen:
    """Length-(2n-1) generator of an n-by-n Hankel matrix, H[i, j] = gen[i + j]."""

    order: int
    gen: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gen))
        if self.order < 1:
            raise PreconditionError("order must be positive")
        if g.shape != (2 * self.order - 1,):
            raise DimensionError(
                f"generator length {g.shape} does not match order {self.order}")
        _check_finite(g, "Hankel generator")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "gen", g)

    @property
    def is_real(self):
        return not np.iscomplexobj(self.gen) or np.all(self.gen.imag == 0)


@dataclass(frozen=True, eq=False)
class ToeplitzGen:
    """First row of a Hermitian Toeplitz matrix; gen[0] must be real."""

    order: int
    gen: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gen))
        if self.order < 1:
            raise PreconditionError("order must be positive")
        if g.shape != (self.order,):
            raise DimensionError(
                f"generator length {g.shape} does not match order {self.order}")
        _check_finite(g, "Toeplitz generator")
        if np.iscomplexobj(g) and g[0].imag != 0:
            raise PreconditionError("leading Toeplitz entry must be real")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "gen", g)


@dataclass(frozen=True)
class StructuredOp:
    """A linear operator applied to vectors in O(size) scalar operations."""

    tag: str
    size: int
    level: int = 0       # for block_fold / mask_e / swap_f
    blocksize: int = 0   # for block_shift / block_shift_up

    def __post_init__(self):
        if self.tag not in _ALL_TAGS:
            raise PreconditionError(f"unknown structured-op tag {self.tag!r}")
        if self.tag in (BLOCK_FOLD, MASK_E, SWAP_F):
            ch = 1 << (self.level - 1) if self.level >= 1 else 0
            if self.level < 1 or (self.tag != MASK_E and self.size % (2 * ch)):
                raise PreconditionError(
                    f"{self.tag} level {self.level} incompatible with size {self.size}")
            if self.tag == MASK_E and ch > self.size:
                raise PreconditionError("mask_e level exceeds size")
        if self.tag in (BLOCK_SHIFT, BLOCK_SHIFT_UP):
            if self.blocksize < 1 or self.size % self.blocksize:
                raise PreconditionError(
                    f"block size {self.blocksize} must divide size {self.size}")


def Exchange(n):
    return StructuredOp(EXCHANGE, n)


def ShiftDown(n):
    return StructuredOp(SHIFT_DOWN, n)


def ShiftUp(n):
    return StructuredOp(SHIFT_UP, n)


def FoldUnitary(n):
    return StructuredOp(FOLD, n)


def BlockFoldUnitary(n, level):
    return StructuredOp(BLOCK_FOLD, n, level=level)


def MaskE(n, level):
    return StructuredOp(MASK_E, n, level=level)


def SwapF(n, level):
    return StructuredOp(SWAP_F, n, level=level)


def BlockShift(n, blocksize):
    return StructuredOp(BLOCK_SHIFT, n, blocksize=blocksize)


def BlockShiftUp(n, blocksize):
    return StructuredOp(BLOCK_SHIFT_UP, n, blocksize=blocksize)


def _fold_vec(x, forward):
    # forward: S x; else S* x
    a = 0.5 * (1 + 1j) if forward else 0.5 * (1 - 1j)
    return a * x + np.conj(a) * x[::-1]


def apply_structured(op, x, mode="normal"):
    """Apply ``op`` (or its transpose/adjoint) to ``x`` along axis 0.

    ``x`` may be a vector or a matrix of stacked columns.
    """
    if mode not in ("normal", "transpose", "adjoint"):
        raise ValueError(f"bad mode {mode!r}")
    x = _as_vector(x, op.size, f"operand of {op.tag}")
    n = op.size
    tag = op.tag
    if tag == EXCHANGE:
        return x[::-1].copy()
    if tag in (SHIFT_DOWN, SHIFT_UP):
        down = (tag == SHIFT_DOWN) == (mode == "normal")
        out = np.zeros_like(x)
        if down:
            out[1:] = x[:-1]
        else:
            out[:-1] = x[1:]
        return out
    if tag == FOLD:
        if mode == "adjoint":
            return _fold_vec(x, forward=False)
        return _fold_vec(x, forward=True)  # S is symmetric: transpose == S
    if tag == BLOCK_FOLD:
        b = n >> (op.level - 1)
        shaped = x.reshape(n // b, b, *x.shape[1:])
        a = 0.5 * (1 + 1j) if mode != "adjoint" else 0.5 * (1 - 1j)
        out = a * shaped + np.conj(a) * shaped[:, ::-1]
        return out.reshape(x.shape)
    if tag == MASK_E:
        out = x.copy()
        out[: 1 << (op.level - 1)] = 0
        return out
    if tag == SWAP_F:
        ch = 1 << (op.level - 1)
        shaped = x.reshape(n // (2 * ch), 2, ch, *x.shape[1:])
        return shaped[:, ::-1].reshape(x.shape)
    if tag in (BLOCK_SHIFT, BLOCK_SHIFT_UP):
        q = op.blocksize
        down = (tag == BLOCK_SHIFT) == (mode == "normal")
        shaped = x.reshape(n // q, q, *x.shape[1:])
        out = np.zeros_like(shaped)
        if down:
            out[:, 1:] = shaped[:, :-1]
        else:
            out[:, :-1] = shaped[:, 1:]
        return out.reshape(x.shape)
    raise PreconditionError(f"unknown tag {tag!r}")


def transpose_op(op):
    """The StructuredOp whose matrix is the transpose of ``op``'s."""
    if op.tag == SHIFT_DOWN:
        return StructuredOp(SHIFT_UP, op.size)
    if op.tag == SHIFT_UP:
        return StructuredOp(SHIFT_DOWN, op.size)
    if op.tag == BLOCK_SHIFT:
        return StructuredOp(BLOCK_SHIFT_UP, op.size, blocksize=op.blocksize)
    if op.tag == BLOCK_SHIFT_UP:
        return StructuredOp(BLOCK_SHIFT, op.size, blocksize=op.blocksize)
    # J, S, E_t, F_t are all symmetric
    return op


def materialize_op(op, cap=DESK_CAP):
    """Dense matrix of a structured operator (desk scale only)."""
    if op.size > cap:
        raise SizeCapError(f"operator size {op.size} exceeds cap {cap}")
    return apply_structured(op, np.eye(op.size, dtype=complex))


# ---------------------------------------------------------------------------
# fast matrix-vector products


def _conv_full(a, x):
    """Full linear convolution along axis 0, FFT length padded to a power of two."""
    m = a.shape[0] + x.shape[0] - 1
    nfft = 1 << max(m - 1, 1).bit_length()
    fa = np.fft.fft(a, nfft, axis=0)
    fx = np.fft.fft(x, nfft, axis=0)
    if a.ndim == 1 and x.ndim == 2:
        fa = fa[:, None]
    out = np.fft.ifft(fa * fx, axis=0)[:m]
    if not (np.iscomplexobj(a) or np.iscomplexobj(x)):
        out = out.real
    return out


def hankel_matvec(h, x):
    """H x in O(n log n) via one fast convolution."""
    n = h.order
    x = _as_vector(x, n, "hankel operand")
    return _conv_full(h.gen, x[::-1])[n - 1: 2 * n - 1]


def toeplitz_matvec(t, x):
    """T x for the Hermitian Toeplitz matrix of ``t`` via circulant-style convolution."""
    n = t.order
    x = _as_vector(x, n, "toeplitz operand")
    # band sequence b[k] = entry on diagonal k-(n-1); J T is Hankel with this generator
    b = np.concatenate([np.conj(t.gen[1:][::-1]), t.gen])
    return _conv_full(b, x[::-1])[n - 1: 2 * n - 1][::-1].copy()


def hankel_materialize(h, cap=DESK_CAP):
    if h.order > cap:
        raise SizeCapError(f"order {h.order} exceeds desk-scale cap {cap}")
    i, j = np.indices((h.order, h.order))
    return h.gen[i + j]


def toeplitz_materialize(t, cap=DESK_CAP):
    if t.order > cap:
        raise SizeCapError(f"order {t.order} exceeds desk-scale cap {cap}")
    i, j = np.indices((t.order, t.order))
    d = j - i
    g = np.asarray(t.gen)
    upper = g[np.abs(d)]
    if np.iscomplexobj(g):
        return np.where(d >= 0, upper, np.conj(upper))
    return upper


# ---------------------------------------------------------------------------
# displacement computations


def _right_multiply(M, op):
    # M @ op  ==  (op^T @ M^T)^T
    return apply_structured(op, M.T, mode="transpose").T


def sylvester_displacement(M, left, right):
    """U M - M V for structured U, V."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("square matrix required")
    if left.size != M.shape[0] or right.size != M.shape[0]:
        raise DimensionError("operator sizes must match the matrix")
    return apply_structured(left, M) - _right_multiply(M, right)


def stein_displacement(M, left, right):
    """M - U M V for structured U, V."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("square matrix required")
    return M - _right_multiply(apply_structured(left, M), right)


def numeric_rank(M, tol=1e-10):
    """Number of singular values above tol * sigma_max."""
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


# ---------------------------------------------------------------------------
# structural predicates


def _default_tol(M, tol):
    if tol is not None:
        return tol
    scale = float(np.abs(M).max()) if M.size else 0.0
    return 1e-10 * scale


def _square(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("square matrix required")
    return M


def is_centrosymmetric(M, tol=None):
    M = _square(M)
    return bool(np.abs(M[::-1, ::-1] - M).max() <= _default_tol(M, tol))


def is_persymmetric(M, tol=None):
    # M J = J M^T holds iff M J is symmetric
    M = _square(M)
    A = M[:, ::-1]
    return bool(np.abs(A - A.T).max() <= _default_tol(M, tol))


def is_bisymmetric(M, tol=None):
    M = _square(M)
    t = _default_tol(M, tol)
    return bool(np.abs(M - M.T).max() <= t) and is_centrosymmetric(M, t)


def is_skew_symmetric(M, tol=None):
    M = _square(M)
    return bool(np.abs(M + M.T).max() <= _default_tol(M, tol))


def is_hermitian(M, tol=None):
    M = _square(M)
    return bool(np.abs(M - M.conj().T).max() <= _default_tol(M, tol))


# ---------------------------------------------------------------------------
# key identity and padding


def key_identity_split(h):
    """Split a real Hankel generator under conjugation by the fold S.

    Returns ``(real_part, imag_part)`` where ``real_part`` generates the
    centrosymmetric Hankel matrix (H + J H J) / 2 and ``imag_part`` is the
    Hermitian Toeplitz generator of i (H J - J H) / 2.  Both come straight
    from the generator in O(n); no dense matrix is formed.
    """
    if not h.is_real:
        raise PreconditionError("key identity split requires a real generator")
    g = np.real(h.gen)
    n = h.order
    real_gen = 0.5 * (g + g[::-1])
    # first row of i * imag(S H S*): entry j is (i/2) (g[n-1-j] - g[n-1+j])
    imag_gen = 0.5j * (g[n - 1:: -1] - g[n - 1:]).astype(complex)
    return HankelGen(n, real_gen), ToeplitzGen(n, imag_gen)


def pad_to_power_of_two(h):
    """Zero-extend the generator so the order becomes the next power of two.

    Power-of-two inputs are returned unchanged; the top-left block of the
    padded matrix equals the original.
    """
    n = h.order
    if n & (n - 1) == 0:
        return h
    p = 1 << n.bit_length()
    padded = np.zeros(2 * p - 1, dtype=h.gen.dtype)
    padded[: 2 * n - 1] = h.gen
    return HankelGen(p, padded)


# ---------------------------------------------------------------------------
# JSON envelopes (generator and dense-oracle files)


def _encode_scalars(a):
    a = np.asarray(a, dtype=complex).ravel()
    return [[float(z.real), float(z.imag)] for z in a]


def _decode_scalars(entries, path):
    if not isinstance(entries, list):
        raise ParseError("expected a list of [re, im] pairs", path)
    out = np.empty(len(entries), dtype=complex)
    for idx, item in enumerate(entries):
        p = f"{path}[{idx}]"
        if isinstance(item, (int, float)):
            out[idx] = complex(item, 0.0)
            continue
        if not isinstance(item, list) or len(item) != 2 or not all(
                isinstance(v, (int, float)) for v in item):
            raise ParseError("expected [re, im]", p)
        out[idx] = complex(item[0], item[1])
    if np.all(out.imag == 0):
        return out.real
    return out


def generator_to_json(g):
    """JSON document for a HankelGen or ToeplitzGen."""
    if isinstance(g, HankelGen):
        return {"kind": "hankel", "order": g.order, "gen": _encode_scalars(g.gen)}
    if isinstance(g, ToeplitzGen):
        return {"kind": "toeplitz", "order": g.order, "gen": _encode_scalars(g.gen)}
    raise TypeError(f"not a generator: {type(g)!r}")


def generator_from_json(doc, path="$"):
    if not isinstance(doc, dict):
        raise ParseError("expected an object", path)
    kind = doc.get("kind")
    if kind not in ("hankel", "toeplitz"):
        raise ParseError(f"unknown kind {kind!r}", f"{path}.kind")
    order = doc.get("order")
    if not isinstance(order, int) or order < 1:
        raise ParseError("order must be a positive integer", f"{path}.order")
    gen = _decode_scalars(doc.get("gen"), f"{path}.gen")
    try:
        if kind == "hankel":
            return HankelGen(order, gen)
        return ToeplitzGen(order, gen)
    except (DimensionError, PreconditionError) as exc:
        raise ParseError(str(exc), f"{path}.gen") from exc


def dense_to_json(M):
    M = np.atleast_2d(np.asarray(M))
    return {"kind": "dense", "rows": M.shape[0], "cols": M.shape[1],
            "entries": _encode_scalars(M)}


def dense_from_json(doc, path="$"):
    if not isinstance(doc, dict) or doc.get("kind") != "dense":
        raise ParseError("expected a dense envelope", path)
    rows, cols = doc.get("rows"), doc.get("cols")
    for key, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or v < 1:
            raise ParseError(f"{key} must be a positive integer", f"{path}.{key}")
    entries = _decode_scalars(doc.get("entries"), f"{path}.entries")
    if entries.size != rows * cols:
        raise ParseError(f"expected {rows * cols} entries, got {entries.size}",
                         f"{path}.entries")
    return entries.reshape(rows, cols)
