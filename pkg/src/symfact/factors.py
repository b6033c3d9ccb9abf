"""Implicit factor matrices: n rows, many columns, Õ(n) storage.

A factor is an operator tree (actually a DAG: the doubling construction
re-uses subtrees by reference, which is what keeps storage near-linear).
Applying a node costs a handful of FFTs and O(n)-time structured operators
per tree level; materialization exists for desk-scale verification only.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import DESK_CAP, StructuredOp, apply_structured
from .errors import DimensionError, ParseError, SizeCapError

_SHIFT_TAGS = (core.SHIFT_DOWN, core.SHIFT_UP, core.BLOCK_SHIFT, core.BLOCK_SHIFT_UP)


def _as_columns(x, ncols, what):
    x = np.asarray(x)
    if x.ndim not in (1, 2):
        raise DimensionError(f"{what} must be 1-D or 2-D")
    if x.shape[0] != ncols:
        raise DimensionError(f"{what} has leading dimension {x.shape[0]}, "
                             f"expected {ncols}")
    return x


class FactorNode:
    """Base class; concrete variants are the dataclasses below."""

    nrows: int

    @property
    def ncols(self):
        return self._ncols

    def apply(self, x):
        """F x for x of shape (ncols,) or (ncols, r)."""
        x = _as_columns(x, self.ncols, "operand")
        flat = x.ndim == 1
        out = self._apply(x[:, None] if flat else x)
        return out[:, 0] if flat else out

    def adjoint_apply(self, y):
        """F* y for y of shape (nrows,) or (nrows, r)."""
        y = _as_columns(y, self.nrows, "adjoint operand")
        flat = y.ndim == 1
        out = self._adjoint(y[:, None] if flat else y)
        return out[:, 0] if flat else out

    def materialize(self, cap=DESK_CAP, _cache=None):
        """Dense (nrows, ncols) matrix, built column-block by column-block."""
        if self.nrows > cap:
            raise SizeCapError(f"nrows {self.nrows} exceeds cap {cap}")
        if _cache is None:
            _cache = {}
        got = _cache.get(id(self))
        if got is None:
            got = self._materialize(cap, _cache)
            _cache[id(self)] = got
        return got

    def __eq__(self, other):
        return _nodes_equal(self, other)

    def __hash__(self):
        return id(self)


def _conv_cols(a, X):
    """Full convolution of a (n,) kernel with each column of X (m, r)."""
    m = a.shape[0] + X.shape[0] - 1
    nfft = 1 << max(m - 1, 1).bit_length()
    fa = np.fft.fft(a, nfft)[:, None]
    fX = np.fft.fft(X, nfft, axis=0)
    return np.fft.ifft(fa * fX, axis=0)[:m]


def _conv_blocks(vb, X, other=None):
    """Full convolution of each row of vb (nb, q) against column stacks.

    With ``X`` of shape (m, r): every row convolves the same columns; result
    (nb, q + m - 1, r). With ``other`` of shape (nb, m, r): row b convolves
    other[b]; result (nb, q + m - 1, r).
    """
    m = (X.shape[0] if other is None else other.shape[1]) + vb.shape[1] - 1
    nfft = 1 << max(m - 1, 1).bit_length()
    fv = np.fft.fft(vb, nfft, axis=1)[:, :, None]
    if other is None:
        fo = np.fft.fft(X, nfft, axis=0)[None, :, :]
    else:
        fo = np.fft.fft(other, nfft, axis=1)
    return np.fft.ifft(fv * fo, axis=1)[:, :m, :]


def _cast_like(out, *inputs):
    if all(not np.iscomplexobj(a) for a in inputs):
        return out.real
    return out


def _freeze(a):
    """Adopt read-only arrays as-is; copy writable ones to keep nodes immutable."""
    a = np.atleast_1d(np.asarray(a))
    if a.flags.writeable:
        a = a.copy()
        a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BaseVector(FactorNode):
    """A single explicit column."""

    v: np.ndarray

    def __post_init__(self):
        v = _freeze(self.v)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "nrows", v.shape[0])
        object.__setattr__(self, "_ncols", 1)

    def _apply(self, x):
        return self.v[:, None] * x

    def _adjoint(self, y):
        return np.conj(self.v)[None, :] @ y

    def _materialize(self, cap, cache):
        return self.v[:, None].astype(complex)


@dataclass(frozen=True, eq=False)
class ShiftExpand(FactorNode):
    """Columns [v, S v, S^2 v, ...] for a (block) shift S; applies via one FFT."""

    v: np.ndarray
    shift: StructuredOp
    count: int

    def __post_init__(self):
        v = _freeze(self.v)
        object.__setattr__(self, "v", v)
        if self.shift.tag not in _SHIFT_TAGS:
            raise DimensionError(f"shift tag {self.shift.tag!r} not a shift")
        if self.shift.size != v.shape[0]:
            raise DimensionError("shift size must equal vector length")
        if self.count < 1:
            raise DimensionError("count must be positive")
        object.__setattr__(self, "nrows", v.shape[0])
        object.__setattr__(self, "_ncols", self.count)

    def _blockshape(self):
        tag = self.shift.tag
        if tag in (core.SHIFT_DOWN, core.SHIFT_UP):
            return self.nrows, tag == core.SHIFT_DOWN
        return self.shift.blocksize, tag == core.BLOCK_SHIFT

    def _apply(self, x):
        q, down = self._blockshape()
        vb = self.v.reshape(-1, q)
        if down:
            out = _conv_blocks(vb, x)[:, :q, :]
        else:
            out = _conv_blocks(vb, x[::-1])[:, self.count - 1: self.count - 1 + q, :]
        out = out.reshape(self.nrows, -1)
        return _cast_like(out, self.v, x)

    def _adjoint(self, y):
        q, down = self._blockshape()
        vb = np.conj(self.v.reshape(-1, q))
        yb = y.reshape(-1, q, y.shape[1])
        c = self.count
        # (F* y)_j sums a per-block correlation of v with y; columns past the
        # shift's nilpotency index are zero
        if down:
            out = _conv_blocks(vb[:, ::-1], None, other=yb)
        else:
            out = _conv_blocks(vb, None, other=yb[:, ::-1])
        acc = out[:, q - 1: q - 1 + c, :].sum(axis=0)
        if acc.shape[0] < c:
            acc = np.concatenate(
                [acc, np.zeros((c - acc.shape[0], acc.shape[1]), dtype=acc.dtype)])
        return _cast_like(acc, self.v, y)

    def _materialize(self, cap, cache):
        cols = np.empty((self.nrows, self.count), dtype=complex)
        cur = self.v.astype(complex)
        for j in range(self.count):
            cols[:, j] = cur
            if j + 1 < self.count:
                cur = apply_structured(self.shift, cur)
        return cols


@dataclass(frozen=True, eq=False)
class ScaledIdentity(FactorNode):
    """The block s * I with n columns (s real nonnegative)."""

    s: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        if self.s < 0:
            raise DimensionError("scale must be nonnegative")
        object.__setattr__(self, "nrows", self.n)
        object.__setattr__(self, "_ncols", self.n)

    def _apply(self, x):
        return self.s * x

    def _adjoint(self, y):
        return self.s * y

    def _materialize(self, cap, cache):
        return self.s * np.eye(self.n, dtype=complex)


@dataclass(frozen=True, eq=False)
class PermutedCopy(FactorNode):
    """The child's columns left-multiplied by a composition of structured ops.

    ``prefix`` is in matrix-product order: ``prefix[0] @ prefix[1] @ ... @ child``.
    """

    child: FactorNode
    prefix: tuple

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        for op in self.prefix:
            if op.size != self.child.nrows:
                raise DimensionError("prefix op size must match child rows")
        object.__setattr__(self, "nrows", self.child.nrows)
        object.__setattr__(self, "_ncols", self.child.ncols)

    def _apply(self, x):
        y = self.child._apply(x)
        for op in reversed(self.prefix):
            y = apply_structured(op, y)
        return y

    def _adjoint(self, y):
        for op in self.prefix:
            y = apply_structured(op, y, mode="adjoint")
        return self.child._adjoint(y)

    def _materialize(self, cap, cache):
        M = self.child.materialize(cap, cache)
        for op in reversed(self.prefix):
            M = apply_structured(op, M)
        return M


@dataclass(frozen=True, eq=False)
class Concat(FactorNode):
    """Horizontal concatenation of child factors."""

    children: tuple
    nrows_hint: int = 0

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.children:
            n = self.children[0].nrows
            for c in self.children:
                if c.nrows != n:
                    raise DimensionError("children must share nrows")
        else:
            n = self.nrows_hint
            if n < 1:
                raise DimensionError("empty Concat needs nrows_hint")
        object.__setattr__(self, "nrows", n)
        object.__setattr__(self, "_ncols", sum(c.ncols for c in self.children))

    def _doubled_child(self):
        # the doubling construction: Concat((A, PermutedCopy(A, ops))) with a
        # shared A; batching both halves through A keeps apply near-linear
        if len(self.children) == 2 and isinstance(self.children[1], PermutedCopy) \
                and self.children[1].child is self.children[0]:
            return self.children[0], self.children[1].prefix
        return None, None

    def _apply(self, x):
        child, prefix = self._doubled_child()
        if child is not None:
            r = x.shape[1]
            w = child.ncols
            both = child._apply(np.concatenate([x[:w], x[w:]], axis=1))
            extra = both[:, r:]
            for op in reversed(prefix):
                extra = apply_structured(op, extra)
            return both[:, :r] + extra
        out = np.zeros((self.nrows, x.shape[1]), dtype=complex)
        pos = 0
        for c in self.children:
            out += c._apply(x[pos: pos + c.ncols])
            pos += c.ncols
        return out

    def _adjoint(self, y):
        if not self.children:
            return np.zeros((0, y.shape[1]), dtype=complex)
        child, prefix = self._doubled_child()
        if child is not None:
            z = y
            for op in prefix:
                z = apply_structured(op, z, mode="adjoint")
            both = child._adjoint(np.concatenate([y, z], axis=1))
            r = y.shape[1]
            return np.concatenate([both[:, :r], both[:, r:]], axis=0)
        return np.concatenate([c._adjoint(y) for c in self.children], axis=0)

    def _materialize(self, cap, cache):
        if not self.children:
            return np.zeros((self.nrows, 0), dtype=complex)
        return np.concatenate([c.materialize(cap, cache) for c in self.children],
                              axis=1)


@dataclass(frozen=True, eq=False)
class UnitaryPrefix(FactorNode):
    """Child left-multiplied by S~_1* S~_2* ... S~_depth* (block-fold adjoints)."""

    child: FactorNode
    depth: int

    def __post_init__(self):
        n = self.child.nrows
        if self.depth < 0 or (self.depth and n >> (self.depth - 1) < 2):
            raise DimensionError(f"depth {self.depth} too deep for {n} rows")
        object.__setattr__(self, "nrows", n)
        object.__setattr__(self, "_ncols", self.child.ncols)

    def _fold(self, y, level, mode):
        op = core.BlockFoldUnitary(self.nrows, level)
        return apply_structured(op, y, mode=mode)

    def _apply(self, x):
        y = self.child._apply(x)
        for s in range(self.depth, 0, -1):
            y = self._fold(y, s, "adjoint")
        return y

    def _adjoint(self, y):
        for s in range(1, self.depth + 1):
            y = self._fold(y, s, "normal")
        return self.child._adjoint(y)

    def _materialize(self, cap, cache):
        M = self.child.materialize(cap, cache)
        for s in range(self.depth, 0, -1):
            M = self._fold(M, s, "adjoint")
        return M


@dataclass(frozen=True, eq=False)
class DenseBlock(FactorNode):
    """Explicit columns; desk-scale displacement blocks only."""

    M: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M)).copy()
        M.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "nrows", M.shape[0])
        object.__setattr__(self, "_ncols", M.shape[1])

    def _apply(self, x):
        return self.M @ x

    def _adjoint(self, y):
        return self.M.conj().T @ y

    def _materialize(self, cap, cache):
        return self.M.astype(complex)


def _nodes_equal(a, b):
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    if isinstance(a, BaseVector):
        return np.array_equal(a.v, b.v)
    if isinstance(a, ShiftExpand):
        return (a.shift == b.shift and a.count == b.count
                and np.array_equal(a.v, b.v))
    if isinstance(a, ScaledIdentity):
        return a.s == b.s and a.n == b.n
    if isinstance(a, PermutedCopy):
        return a.prefix == b.prefix and _nodes_equal(a.child, b.child)
    if isinstance(a, Concat):
        return (a.nrows == b.nrows and len(a.children) == len(b.children)
                and all(_nodes_equal(x, y) for x, y in zip(a.children, b.children)))
    if isinstance(a, UnitaryPrefix):
        return a.depth == b.depth and _nodes_equal(a.child, b.child)
    if isinstance(a, DenseBlock):
        return np.array_equal(a.M, b.M)
    return NotImplemented


# ---------------------------------------------------------------------------
# the B/C pair


@dataclass(eq=False)
class FactorPair:
    """B, C with materialized B B* - C C* equal to the target on its leading
    source_order-by-source_order block."""

    B: FactorNode
    C: FactorNode
    source_order: int
    provenance: str = ""
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.B.nrows != self.C.nrows:
            raise DimensionError("B and C must share nrows")
        if not (1 <= self.source_order <= self.B.nrows):
            raise DimensionError("source_order out of range")

    @property
    def nrows(self):
        return self.B.nrows

    def apply_gram(self, x):
        """(B B* - C C*) x.

        Accepts vectors of length nrows, or of length source_order (these are
        zero-padded and the result truncated, matching the restricted target).
        """
        x = np.asarray(x)
        restrict = x.shape[0] == self.source_order != self.nrows
        if restrict:
            pad = np.zeros((self.nrows,) + x.shape[1:], dtype=x.dtype)
            pad[: self.source_order] = x
            x = pad
        elif x.shape[0] != self.nrows:
            raise DimensionError(f"vector length {x.shape[0]} matches neither "
                                 f"nrows {self.nrows} nor source order "
                                 f"{self.source_order}")
        out = self.B.apply(self.B.adjoint_apply(x)) - self.C.apply(self.C.adjoint_apply(x))
        return out[: self.source_order] if restrict else out

    def reconstruct(self, cap=DESK_CAP):
        """Dense B B* - C C* restricted to the leading source_order block."""
        Bm = self.B.materialize(cap)
        Cm = self.C.materialize(cap)
        G = Bm @ Bm.conj().T - Cm @ Cm.conj().T
        return G[: self.source_order, : self.source_order]


# ---------------------------------------------------------------------------
# serialization: a JSON operator tree with a shared-subtree table


def _op_to_doc(op):
    doc = {"tag": op.tag, "size": op.size}
    if op.level:
        doc["level"] = op.level
    if op.blocksize:
        doc["blocksize"] = op.blocksize
    return doc


def _op_from_doc(doc, path):
    if not isinstance(doc, dict):
        raise ParseError("expected an operator object", path)
    try:
        return StructuredOp(doc.get("tag"), doc.get("size"),
                            level=doc.get("level", 0),
                            blocksize=doc.get("blocksize", 0))
    except Exception as exc:
        raise ParseError(f"bad structured op: {exc}", path) from exc


def _count_refs(node, counts):
    counts[id(node)] = counts.get(id(node), 0) + 1
    if counts[id(node)] > 1:
        return
    if isinstance(node, (PermutedCopy, UnitaryPrefix)):
        _count_refs(node.child, counts)
    elif isinstance(node, Concat):
        for c in node.children:
            _count_refs(c, counts)


def _node_to_doc(node, shared_ids, shared_docs, counts):
    nid = shared_ids.get(id(node))
    if nid is not None:
        return {"node": "ref", "id": nid}
    doc = _node_body(node, shared_ids, shared_docs, counts)
    if counts.get(id(node), 0) > 1:
        nid = len(shared_docs)
        shared_ids[id(node)] = nid
        shared_docs.append(doc)
        return {"node": "ref", "id": nid}
    return doc


def _node_body(node, shared_ids, shared_docs, counts):
    rec = lambda child: _node_to_doc(child, shared_ids, shared_docs, counts)
    if isinstance(node, BaseVector):
        return {"node": "base_vector", "v": core._encode_scalars(node.v)}
    if isinstance(node, ShiftExpand):
        return {"node": "shift_expand", "shift": _op_to_doc(node.shift),
                "count": node.count, "v": core._encode_scalars(node.v)}
    if isinstance(node, ScaledIdentity):
        return {"node": "scaled_identity", "s": node.s, "n": node.n}
    if isinstance(node, PermutedCopy):
        return {"node": "permuted_copy",
                "prefix": [_op_to_doc(op) for op in node.prefix],
                "child": rec(node.child)}
    if isinstance(node, Concat):
        return {"node": "concat", "nrows": node.nrows,
                "children": [rec(c) for c in node.children]}
    if isinstance(node, UnitaryPrefix):
        return {"node": "unitary_prefix", "depth": node.depth,
                "child": rec(node.child)}
    if isinstance(node, DenseBlock):
        return {"node": "dense_block", "rows": node.M.shape[0],
                "cols": node.M.shape[1], "entries": core._encode_scalars(node.M)}
    raise TypeError(f"unknown node type {type(node)!r}")


def node_to_doc(node):
    """JSON-ready document {"nrows", "tree", "shared"} for one factor."""
    counts = {}
    _count_refs(node, counts)
    shared_ids, shared_docs = {}, []
    tree = _node_to_doc(node, shared_ids, shared_docs, counts)
    doc = {"nrows": node.nrows, "tree": tree}
    if shared_docs:
        doc["shared"] = shared_docs
    return doc


def _node_from_doc(doc, shared, memo, path):
    if not isinstance(doc, dict):
        raise ParseError("expected a node object", path)
    kind = doc.get("node")
    if kind == "ref":
        nid = doc.get("id")
        if not isinstance(nid, int) or not 0 <= nid < len(shared):
            raise ParseError(f"bad shared reference {nid!r}", f"{path}.id")
        if nid not in memo:
            memo[nid] = _node_from_doc(shared[nid], shared, memo,
                                       f"$.shared[{nid}]")
        return memo[nid]
    try:
        if kind == "base_vector":
            return BaseVector(core._decode_scalars(doc.get("v"), f"{path}.v"))
        if kind == "shift_expand":
            return ShiftExpand(core._decode_scalars(doc.get("v"), f"{path}.v"),
                               _op_from_doc(doc.get("shift"), f"{path}.shift"),
                               doc.get("count"))
        if kind == "scaled_identity":
            return ScaledIdentity(doc.get("s"), doc.get("n"))
        if kind == "permuted_copy":
            pref = doc.get("prefix")
            if not isinstance(pref, list):
                raise ParseError("prefix must be a list", f"{path}.prefix")
            ops = tuple(_op_from_doc(p, f"{path}.prefix[{i}]")
                        for i, p in enumerate(pref))
            return PermutedCopy(_node_from_doc(doc.get("child"), shared, memo,
                                               f"{path}.child"), ops)
        if kind == "concat":
            kids = doc.get("children")
            if not isinstance(kids, list):
                raise ParseError("children must be a list", f"{path}.children")
            children = tuple(_node_from_doc(c, shared, memo,
                                            f"{path}.children[{i}]")
                             for i, c in enumerate(kids))
            return Concat(children, nrows_hint=doc.get("nrows", 0))
        if kind == "unitary_prefix":
            return UnitaryPrefix(_node_from_doc(doc.get("child"), shared, memo,
                                                f"{path}.child"), doc.get("depth"))
        if kind == "dense_block":
            entries = core._decode_scalars(doc.get("entries"), f"{path}.entries")
            rows, cols = doc.get("rows"), doc.get("cols")
            if not isinstance(rows, int) or not isinstance(cols, int) \
                    or entries.size != rows * cols:
                raise ParseError("rows/cols do not match entries", path)
            return DenseBlock(entries.reshape(rows, cols))
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"bad {kind} node: {exc}", path) from exc
    raise ParseError(f"unknown node kind {kind!r}", f"{path}.node")


def node_from_doc(doc, path="$"):
    if not isinstance(doc, dict):
        raise ParseError("expected a factor document", path)
    shared = doc.get("shared", [])
    if not isinstance(shared, list):
        raise ParseError("shared must be a list", f"{path}.shared")
    node = _node_from_doc(doc.get("tree"), shared, {}, f"{path}.tree")
    nrows = doc.get("nrows")
    if nrows is not None and nrows != node.nrows:
        raise ParseError(f"declared nrows {nrows} != actual {node.nrows}",
                         f"{path}.nrows")
    return node


def serialize(node):
    """Factor tree -> JSON text; exact (repr round-trip) scalars."""
    return json.dumps(node_to_doc(node))


def deserialize(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    return node_from_doc(doc)


def pair_to_doc(pair):
    return {"nrows": pair.nrows, "sourceOrder": pair.source_order,
            "provenance": pair.provenance,
            "B": node_to_doc(pair.B), "C": node_to_doc(pair.C)}


def pair_from_doc(doc, path="$"):
    if not isinstance(doc, dict):
        raise ParseError("expected a factor-pair document", path)
    for key in ("B", "C"):
        if key not in doc:
            raise ParseError(f"missing {key}", f"{path}.{key}")
    B = node_from_doc(doc["B"], f"{path}.B")
    C = node_from_doc(doc["C"], f"{path}.C")
    so = doc.get("sourceOrder", B.nrows)
    if not isinstance(so, int):
        raise ParseError("sourceOrder must be an integer", f"{path}.sourceOrder")
    return FactorPair(B, C, so, provenance=doc.get("provenance", ""))


def serialize_pair(pair):
    return json.dumps(pair_to_doc(pair))


def deserialize_pair(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    return pair_from_doc(doc)
