"""Guarded-command machine front-end.

Parses machine descriptions and predicate expressions, and expands a
machine into an explicit :class:`~rlv.ts.TransitionSystem` by taking
the product of its control nodes with the declared variable ranges.

Grammar (UTF-8, free-form whitespace)::

    system <name> {
      nodes <n1> <n2> ... ;
      var <v> : <lo>..<hi> ;
      trans <src> -> <dst> [when <BoolExpr>] { [<v> := <IntExpr> ;]* }
      ...
    }

Expressions use  && || ! = != < <= > >= + - * div gcd( , )  and the
node test ``c = <node-name>``; a reachability formula is written
``<BoolExpr> =>> <BoolExpr>``.  Arithmetic is over naturals: ``-``
truncates at 0 and ``div`` requires a nonzero literal divisor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EvalError, ExpandError, ParseError, StructureError
from .ts import ReachFormula, StatePredicate, TransitionSystem

# ------------------------------------------------------------------ AST


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class NodeTest:
    node: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


INT_OPS = {"+", "-", "*", "div", "gcd"}
CMP_OPS = {"=", "!=", "<", "<=", ">", ">="}
BOOL_OPS = {"&&", "||"}


# ---------------------------------------------------------------- lexer

_PUNCT = ["=>>", ":=", "..", "->", "||", "&&", "!=", "<=", ">=",
          "{", "}", ";", ":", ",", "(", ")", "+", "-", "*", "=", "<", ">", "!"]

_KEYWORDS = {"system", "nodes", "var", "trans", "when", "div"}

_RESERVED_NAMES = {"c", "gcd"}  # node test variable; builtin function


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "kw" | punctuation literal | "eof"
    value: str
    line: int
    col: int


def tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            toks.append(Token(matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Cursor:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what=None):
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {what or kind!r}, found {t.value or 'end of input'!r}",
                             t.line, t.col)
        return self.next()

    def accept(self, kind):
        if self.peek().kind == kind:
            return self.next()
        return None


# ------------------------------------------------------- expression parse

def _parse_or(cur):
    e = _parse_and(cur)
    while cur.accept("||"):
        e = Bin("||", e, _parse_and(cur))
    return e


def _parse_and(cur):
    e = _parse_not(cur)
    while cur.accept("&&"):
        e = Bin("&&", e, _parse_not(cur))
    return e


def _parse_not(cur):
    if cur.accept("!"):
        return Unary("!", _parse_not(cur))
    return _parse_cmp(cur)


def _parse_cmp(cur):
    e = _parse_add(cur)
    t = cur.peek()
    if t.kind in CMP_OPS:
        cur.next()
        return Bin(t.kind, e, _parse_add(cur))
    return e


def _parse_add(cur):
    e = _parse_mul(cur)
    while True:
        t = cur.peek()
        if t.kind in ("+", "-"):
            cur.next()
            e = Bin(t.kind, e, _parse_mul(cur))
        else:
            return e


def _parse_mul(cur):
    e = _parse_atom(cur)
    while True:
        t = cur.peek()
        if t.kind == "*" or (t.kind == "kw" and t.value == "div"):
            cur.next()
            rhs = _parse_atom(cur)
            if t.value == "div":
                if not isinstance(rhs, IntLit):
                    raise ParseError("div requires a literal divisor", t.line, t.col)
                if rhs.value == 0:
                    raise ParseError("division by zero literal", t.line, t.col)
            e = Bin(t.value, e, rhs)
        else:
            return e


def _parse_atom(cur):
    t = cur.peek()
    if t.kind == "int":
        cur.next()
        return IntLit(int(t.value))
    if t.kind == "ident":
        cur.next()
        if t.value == "gcd" and cur.peek().kind == "(":
            cur.next()
            a = _parse_or(cur)
            cur.expect(",")
            b = _parse_or(cur)
            cur.expect(")")
            return Bin("gcd", a, b)
        return VarRef(t.value)
    if t.kind == "(":
        cur.next()
        e = _parse_or(cur)
        cur.expect(")")
        return e
    raise ParseError(f"expected an expression, found {t.value or 'end of input'!r}",
                     t.line, t.col)


def _type_check(expr, model, want):
    """Resolve names, rewrite node tests, and return a typed AST."""
    typed, ty = _resolve(expr, model)
    if ty != want:
        raise ParseError(f"expected a {want} expression, got {ty}")
    return typed


def _resolve(expr, model):
    if isinstance(expr, IntLit):
        return expr, "int"
    if isinstance(expr, NodeTest):  # already typed; re-checking is idempotent
        if expr.node not in model.node_index:
            raise ParseError(f"unknown node {expr.node!r}")
        return expr, "bool"
    if isinstance(expr, VarRef):
        if expr.name == "c":
            raise ParseError("'c' may only appear in a node test  c = <node>")
        if expr.name not in model.var_index:
            raise ParseError(f"undeclared variable {expr.name!r}")
        return expr, "int"
    if isinstance(expr, Unary):
        inner, ty = _resolve(expr.operand, model)
        if ty != "bool":
            raise ParseError("'!' applies to a boolean expression")
        return Unary("!", inner), "bool"
    if isinstance(expr, Bin):
        if expr.op in BOOL_OPS:
            l, lt = _resolve(expr.left, model)
            r, rt = _resolve(expr.right, model)
            if lt != "bool" or rt != "bool":
                raise ParseError(f"{expr.op!r} applies to boolean expressions")
            return Bin(expr.op, l, r), "bool"
        if expr.op in CMP_OPS:
            if isinstance(expr.left, VarRef) and expr.left.name == "c":
                if expr.op != "=":
                    raise ParseError("node test must use '=':  c = <node>")
                if not isinstance(expr.right, VarRef) or expr.right.name not in model.node_index:
                    raise ParseError("node test compares c to a declared node name")
                return NodeTest(expr.right.name), "bool"
            l, lt = _resolve(expr.left, model)
            r, rt = _resolve(expr.right, model)
            if lt != "int" or rt != "int":
                raise ParseError(f"comparison {expr.op!r} applies to integer expressions")
            return Bin(expr.op, l, r), "bool"
        if expr.op in INT_OPS:
            l, lt = _resolve(expr.left, model)
            r, rt = _resolve(expr.right, model)
            if lt != "int" or rt != "int":
                raise ParseError(f"{expr.op!r} applies to integer expressions")
            return Bin(expr.op, l, r), "int"
    raise ParseError(f"malformed expression {expr!r}")


# ---------------------------------------------------------------- model


@dataclass(frozen=True)
class Arrow:
    src: str
    dst: str
    guard: object  # typed BoolExpr AST or None
    updates: tuple  # of (var name, typed IntExpr AST)
    text: str = ""


@dataclass(frozen=True)
class EfsmModel:
    name: str
    nodes: tuple
    vars: tuple  # of (name, lo, hi)
    arrows: tuple
    node_index: dict = field(compare=False, repr=False)
    var_index: dict = field(compare=False, repr=False)


def _fresh_model(name, nodes, vars, arrows=()):
    return EfsmModel(name, tuple(nodes), tuple(vars), tuple(arrows),
                     {n: i for i, n in enumerate(nodes)},
                     {v[0]: i for i, v in enumerate(vars)})


def parse_model(text):
    """Parse machine source text into an :class:`EfsmModel`."""
    cur = _Cursor(tokenize(text))
    t = cur.expect("kw", "'system'")
    if t.value != "system":
        raise ParseError("model must start with 'system'", t.line, t.col)
    name = cur.expect("ident", "system name").value
    cur.expect("{")
    nodes, vars, raw_arrows = [], [], []
    seen = set()
    while not cur.accept("}"):
        t = cur.peek()
        if t.kind != "kw":
            raise ParseError(f"expected 'nodes', 'var' or 'trans', found {t.value!r}",
                             t.line, t.col)
        if t.value == "nodes":
            cur.next()
            while cur.peek().kind == "ident":
                nt = cur.next()
                if nt.value in seen or nt.value in _RESERVED_NAMES:
                    raise ParseError(f"duplicate or reserved name {nt.value!r}", nt.line, nt.col)
                seen.add(nt.value)
                nodes.append(nt.value)
            cur.expect(";")
        elif t.value == "var":
            cur.next()
            vt = cur.expect("ident", "variable name")
            if vt.value in seen or vt.value in _RESERVED_NAMES:
                raise ParseError(f"duplicate or reserved name {vt.value!r}", vt.line, vt.col)
            seen.add(vt.value)
            cur.expect(":")
            lo = int(cur.expect("int", "lower bound").value)
            cur.expect("..")
            hit = cur.expect("int", "upper bound")
            hi = int(hit.value)
            if hi < lo:
                raise ParseError(f"empty range {lo}..{hi}", hit.line, hit.col)
            vars.append((vt.value, lo, hi))
            cur.expect(";")
        elif t.value == "trans":
            cur.next()
            st = cur.expect("ident", "source node")
            cur.expect("->")
            dt = cur.expect("ident", "target node")
            guard = None
            if cur.peek().kind == "kw" and cur.peek().value == "when":
                cur.next()
                guard = _parse_or(cur)
            cur.expect("{")
            updates = []
            while not cur.accept("}"):
                ut = cur.expect("ident", "update variable")
                cur.expect(":=")
                upd = _parse_or(cur)
                cur.expect(";")
                updates.append((ut, upd))
            raw_arrows.append((st, dt, guard, tuple(updates)))
        else:
            raise ParseError(f"unexpected keyword {t.value!r}", t.line, t.col)
    cur.expect("eof", "end of input")
    if not nodes:
        raise ParseError("model declares no nodes")

    model = _fresh_model(name, nodes, vars)
    arrows = []
    for st, dt, guard, updates in raw_arrows:
        for tok in (st, dt):
            if tok.value not in model.node_index:
                raise ParseError(f"undeclared node {tok.value!r}", tok.line, tok.col)
        typed_guard = _type_check(guard, model, "bool") if guard is not None else None
        seen_upd = set()
        typed_updates = []
        for ut, upd in updates:
            if ut.value not in model.var_index:
                raise ParseError(f"assignment to undeclared variable {ut.value!r}",
                                 ut.line, ut.col)
            if ut.value in seen_upd:
                raise ParseError(f"variable {ut.value!r} assigned twice in one transition",
                                 ut.line, ut.col)
            seen_upd.add(ut.value)
            typed_updates.append((ut.value, _type_check(upd, model, "int")))
        arrows.append(Arrow(st.value, dt.value, typed_guard, tuple(typed_updates),
                            text=f"{st.value} -> {dt.value}"))
    return _fresh_model(name, nodes, vars, arrows)


# ------------------------------------------------------------ evaluation


def _eval(expr, env):
    """Vectorised evaluation; env maps variable names to int64 arrays and
    '@node' to the node-id array plus '@nodes' to the name->id map."""
    if isinstance(expr, IntLit):
        return np.int64(expr.value)
    if isinstance(expr, VarRef):
        return env[expr.name]
    if isinstance(expr, NodeTest):
        return env["@node"] == env["@nodes"][expr.node]
    if isinstance(expr, Unary):
        return ~_eval(expr.operand, env)
    a = _eval(expr.left, env)
    b = _eval(expr.right, env)
    op = expr.op
    if op == "&&":
        return a & b
    if op == "||":
        return a | b
    if op == "+":
        return a + b
    if op == "-":
        return np.maximum(a - b, 0)  # natural subtraction
    if op == "*":
        return a * b
    if op == "div":
        if int(b) == 0:
            raise EvalError("division by zero")
        return a // b
    if op == "gcd":
        return np.gcd(a, b)
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise EvalError(f"unknown operator {op!r}")


@dataclass(frozen=True)
class Frame:
    """Binding between an expanded system and its source machine."""

    model: EfsmModel
    node_names: tuple
    node_id: np.ndarray  # per-state control-node id
    columns: dict  # var name -> per-state value array
    block: int  # states per control node

    def env(self, sl=slice(None)):
        env = {v: col[sl] for v, col in self.columns.items()}
        env["@node"] = self.node_id[sl]
        env["@nodes"] = {n: i for i, n in enumerate(self.node_names)}
        return env


@dataclass(frozen=True)
class RangeWarning:
    arrow: int  # 1-based arrow index
    state: tuple  # source state label
    var: str
    value: int


def expand(model):
    """Expand a machine to its explicit transition system.

    States are the product of control nodes and variable ranges, in
    canonical order (node-major, then variable tuples lexicographic by
    declaration order).  Updates are parallel assignments evaluated in
    the pre-state.  A transition instance whose update leaves a
    variable's declared range is dropped and recorded as a warning:
    dropping can only create spurious final states, which may make a
    valid formula look invalid but never certifies an invalid one.
    """
    names = [v[0] for v in model.vars]
    los = np.array([v[1] for v in model.vars], dtype=np.int64)
    sizes = [v[2] - v[1] + 1 for v in model.vars]
    block = int(np.prod(sizes)) if sizes else 1
    n_nodes = len(model.nodes)
    total = n_nodes * block

    if sizes:
        offsets = np.unravel_index(np.arange(block), sizes)
        block_cols = [off.astype(np.int64) + lo for off, lo in zip(offsets, los)]
        strides = np.array([int(np.prod(sizes[i + 1:])) for i in range(len(sizes))],
                           dtype=np.int64)
    else:
        block_cols, strides = [], np.zeros(0, dtype=np.int64)

    columns = {v: np.tile(col, n_nodes) for v, col in zip(names, block_cols)}
    node_id = np.repeat(np.arange(n_nodes, dtype=np.int64), block)
    frame = Frame(model, tuple(model.nodes), node_id, columns, block)

    if sizes:
        block_rows = [tuple(row) for row in np.stack(block_cols, axis=1).tolist()]
        labels = [(nd, row) for nd in model.nodes for row in block_rows]
    else:
        labels = [(nd, ()) for nd in model.nodes]

    src_parts, dst_parts = [], []
    warnings = []
    for ai, arrow in enumerate(model.arrows, start=1):
        k_src = model.node_index[arrow.src]
        k_dst = model.node_index[arrow.dst]
        sl = slice(k_src * block, (k_src + 1) * block)
        env = frame.env(sl)
        if arrow.guard is not None:
            try:
                keep = _eval(arrow.guard, env)
            except EvalError as e:
                raise ExpandError(f"arrow {ai} guard: {e}") from e
            keep = np.broadcast_to(keep, (block,)).copy()
        else:
            keep = np.ones(block, dtype=np.bool_)
        if not keep.any():
            continue
        new_vals = [env[v] for v in names]
        for v, upd in arrow.updates:
            try:
                val = _eval(upd, env)
            except EvalError as e:
                raise ExpandError(f"arrow {ai} update of {v!r}: {e}") from e
            new_vals[model.var_index[v]] = np.broadcast_to(val, (block,))
        in_range = keep.copy()
        for j, (v, lo, hi) in enumerate(model.vars):
            bad = keep & ((new_vals[j] < lo) | (new_vals[j] > hi))
            if bad.any():
                for row in np.flatnonzero(bad):
                    warnings.append(RangeWarning(
                        ai, labels[k_src * block + int(row)], v, int(new_vals[j][row])))
                in_range &= ~bad
        rows = np.flatnonzero(in_range)
        if rows.size == 0:
            continue
        if sizes:
            off = np.zeros(rows.size, dtype=np.int64)
            for j in range(len(sizes)):
                col = np.broadcast_to(new_vals[j], (block,))[rows]
                off += (col - los[j]) * strides[j]
        else:
            off = np.zeros(rows.size, dtype=np.int64)
        src_parts.append(k_src * block + rows.astype(np.int64))
        dst_parts.append(k_dst * block + off)

    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
    else:
        src = np.zeros(0, dtype=np.int64)
        dst = np.zeros(0, dtype=np.int64)
    system = TransitionSystem(labels, (src, dst), name=model.name, frame=frame)
    return system, warnings


def eval_pred(expr, system):
    """Evaluate a predicate expression (text or typed AST) extensionally."""
    frame = system.frame
    if frame is None:
        raise StructureError("system has no machine frame; cannot evaluate expressions")
    if isinstance(expr, str):
        text = expr.strip()
        cur = _Cursor(tokenize(expr))
        ast = _parse_or(cur)
        cur.expect("eof", "end of predicate")
        ast = _type_check(ast, frame.model, "bool")
    else:
        text = None
        ast = _type_check(expr, frame.model, "bool")
    try:
        mask = _eval(ast, frame.env())
    except EvalError as e:
        raise EvalError(f"predicate evaluation: {e}") from e
    mask = np.broadcast_to(mask, (system.n,)).copy()
    return StatePredicate(system, mask, text)


def parse_formula(text, system):
    """Parse ``<BoolExpr> =>> <BoolExpr>`` into a :class:`ReachFormula`."""
    frame = system.frame
    if frame is None:
        raise StructureError("system has no machine frame; cannot parse formulas")
    cur = _Cursor(tokenize(text))
    lhs_ast = _type_check(_parse_or(cur), frame.model, "bool")
    cur.expect("=>>", "'=>>'")
    rhs_ast = _type_check(_parse_or(cur), frame.model, "bool")
    cur.expect("eof", "end of formula")
    lhs = eval_pred(lhs_ast, system)
    rhs = eval_pred(rhs_ast, system)
    lhs = StatePredicate(system, lhs.mask, _render(lhs_ast))
    rhs = StatePredicate(system, rhs.mask, _render(rhs_ast))
    return ReachFormula(lhs, rhs)


def _render(expr):
    """Canonical textual form of a parsed expression (for reports/goldens)."""
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, VarRef):
        return expr.name
    if isinstance(expr, NodeTest):
        return f"c = {expr.node}"
    if isinstance(expr, Unary):
        return f"!({_render(expr.operand)})"
    if isinstance(expr, Bin):
        if expr.op == "gcd":
            return f"gcd({_render(expr.left)}, {_render(expr.right)})"
        return f"({_render(expr.left)} {expr.op} {_render(expr.right)})"
    return repr(expr)


def select_component(model, arrow_indices, node_subset):
    """Sub-machine from 1-based arrow indices and a node subset.

    Selection does not by itself guarantee the sub-system conditions;
    callers must still run ``is_component`` on the two expansions.
    """
    nodes = list(dict.fromkeys(node_subset))
    for nd in nodes:
        if nd not in model.node_index:
            raise StructureError(f"unknown node {nd!r}")
    picked = []
    for i in arrow_indices:
        if not 1 <= i <= len(model.arrows):
            raise StructureError(f"arrow index {i} out of range 1..{len(model.arrows)}")
        arrow = model.arrows[i - 1]
        if arrow.src not in nodes or arrow.dst not in nodes:
            raise StructureError(
                f"arrow {i} ({arrow.text}) references a node outside the selection")
        picked.append(arrow)
    nodes_ordered = [nd for nd in model.nodes if nd in set(nodes)]
    return _fresh_model(f"{model.name}.sel", nodes_ordered, model.vars, picked)
