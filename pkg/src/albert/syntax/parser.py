"""Recursive-descent parser for Albert programs and literal values.

Concrete syntax summary::

    program  ::= (type NAME = ty | def NAME : ty -> ty = instrs)*
    instrs   ::= instr (; instr)* [;]
    instr    ::= noop | drop x | lhs = rhs | match x with branches end | rhs
    lhs      ::= x | { l = x ; ... } | ( x , y )
    rhs      ::= arg | f arg | x.l | { x with l = y ; ... } | C arg [: ty]
               | x + y | x >= y | x[y] | update m k v | match x with ... end
    arg      ::= x | value | { l = x ; ... }

Literal values whose type cannot be read off the syntax (empty lists, maps,
``None``, ints vs nats, mutez, constructors) take an ascription
``(value : ty)``.  Unsigned integer literals are nats; signed ones are ints.
"""

from __future__ import annotations

from . import ast as A
from .lexer import Token, tokenize, unescape
from ..errors import AlbertTypeError, ParseError
from .. import types as T

_PRIM_NAMES = {k: A.Prim(k) for k in A.PRIM_KINDS}
_TYPE_OPS = {"list": 1, "option": 1, "map": 2, "or": 2}


class Parser:
    def __init__(self, source: str, aliases: dict | None = None):
        self.toks = tokenize(source)
        self.i = 0
        self.aliases: dict[str, A.AlbertType] = dict(aliases or {})

    # ------------------------------------------------------------ utilities

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(tok.line, tok.col, message)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.advance().text

    def ctor_name(self) -> str:
        if self.tok.kind == "ident" or (self.tok.kind == "kw" and self.tok.text in ("True", "False")):
            return self.advance().text
        raise self.error(f"expected constructor, found {self.tok.text!r}")

    # -------------------------------------------------------------- program

    def program(self) -> A.Program:
        aliases: list = []
        functions: list = []
        seen_alias: set = set()
        seen_fun: set = set()
        while self.tok.kind != "eof":
            start = self.tok
            if self.at("type"):
                self.advance()
                name_tok = self.tok
                name = self.ident("type name")
                if name in seen_alias or name in _PRIM_NAMES or name in _TYPE_OPS:
                    raise self.error(f"duplicate or reserved type name {name!r}", name_tok)
                self.expect("=")
                ty = self.type()
                seen_alias.add(name)
                aliases.append((name, ty))
                self.aliases[name] = ty
                if self.at(";"):
                    self.advance()
            elif self.at("def"):
                self.advance()
                name_tok = self.tok
                name = self.ident("function name")
                if name in seen_fun:
                    raise self.error(f"duplicate function {name!r}", name_tok)
                self.expect(":")
                tin = self.type()
                self.expect("->")
                tout = self.type()
                self.expect("=")
                body = self.instrs()
                seen_fun.add(name)
                functions.append(A.FunctionDef(name, tin, tout, body, pos=start.pos))
            else:
                raise self.error(f"expected 'def' or 'type', found {self.tok.text!r}")
        return A.Program(tuple(aliases), tuple(functions))

    # ---------------------------------------------------------------- types

    def type(self) -> A.AlbertType:
        tok = self.tok
        if tok.kind == "ident" and tok.text in _TYPE_OPS:
            self.advance()
            args = [self.atype() for _ in range(_TYPE_OPS[tok.text])]
            match tok.text:
                case "list":
                    return A.ListTy(args[0])
                case "option":
                    return A.OptionTy(args[0])
                case "map":
                    return A.MapTy(args[0], args[1])
                case "or":
                    return A.VariantTy((("Left", args[0]), ("Right", args[1])))
        return self.atype()

    def atype(self) -> A.AlbertType:
        tok = self.tok
        if self.at("("):
            self.advance()
            t = self.type()
            self.expect(")")
            return t
        if self.at("{"):
            self.advance()
            fields = self._labelled(":", "}", self.type, sep=";")
            return A.RecordTy(tuple(fields))
        if self.at("["):
            self.advance()
            if self.at("|"):
                self.advance()
            ctors = []
            seen = set()
            while True:
                ctok = self.tok
                c = self.ctor_name()
                if c in seen:
                    raise self.error(f"duplicate constructor {c!r}", ctok)
                seen.add(c)
                self.expect(":")
                ctors.append((c, self.type()))
                if self.at("|"):
                    self.advance()
                    continue
                self.expect("]")
                break
            return A.VariantTy(tuple(ctors))
        if tok.kind == "ident":
            if tok.text in _TYPE_OPS:
                raise self.error(f"type operator {tok.text!r} needs parentheses here")
            self.advance()
            if tok.text == "unit":
                return A.UNIT
            if tok.text in _PRIM_NAMES:
                return _PRIM_NAMES[tok.text]
            return A.Alias(tok.text)
        raise self.error(f"expected a type, found {tok.text or 'end of input'!r}")

    def _labelled(self, eq: str, close: str, item, sep: str = ";"):
        """Parse ``l eq item (sep l eq item)* [sep] close``; labels must be distinct."""
        out = []
        seen = set()
        while not self.at(close):
            ltok = self.tok
            label = self.ident("label")
            if label in seen:
                raise self.error(f"duplicate label {label!r}", ltok)
            seen.add(label)
            self.expect(eq)
            out.append((label, item()))
            if self.at(sep):
                self.advance()
            elif not self.at(close):
                raise self.error(f"expected {sep!r} or {close!r}, found {self.tok.text!r}")
        self.expect(close)
        return out

    # --------------------------------------------------------- instructions

    _STOP = ("def", "type", "|", "end")

    def _at_stop(self) -> bool:
        return self.tok.kind == "eof" or (self.tok.kind in ("kw", "punct") and self.tok.text in self._STOP)

    def instrs(self) -> A.Instruction:
        items = [self.instr()]
        while self.at(";"):
            self.advance()
            if self._at_stop():
                break
            items.append(self.instr())
        if not self._at_stop():
            raise self.error(f"expected ';' between instructions, found {self.tok.text!r}")
        return A.seq_of(items)

    def instr(self) -> A.Instruction:
        tok = self.tok
        pos = tok.pos
        if self.at("noop"):
            self.advance()
            return A.Noop(pos=pos)
        if self.at("drop"):
            self.advance()
            return A.Drop(self.ident("variable"), pos=pos)
        if self.at("match"):
            scrut, branches = self._match(self.instrs)
            return A.MatchInstr(scrut, branches, pos=pos)
        if self.at("(") and self.peek().kind == "ident" and self.peek(2).text == ",":
            self.advance()
            a = self.ident("variable")
            self.expect(",")
            btok = self.tok
            b = self.ident("variable")
            if a == b:
                raise self.error(f"variable {b!r} bound twice in pattern", btok)
            self.expect(")")
            self.expect("=")
            return A.Assign(A.RecordPat((("car", a), ("cdr", b)), pos=pos), self.rhs(), pos=pos)
        if self.at("{") and not (self.peek().kind == "ident" and self.peek(2).text == "with"):
            arg = self._brace_arg()
            if self.at("="):
                if not isinstance(arg, A.RecordArg):
                    raise self.error("left-hand side record pattern must bind variables")
                self._check_distinct_vars(arg.fields, tok)
                self.advance()
                return A.Assign(A.RecordPat(arg.fields, pos=pos), self.rhs(), pos=pos)
            return A.RhsInstr(A.ArgRhs(arg, pos=pos), pos=pos)
        if tok.kind == "ident" and self.peek().text == "=" and self.peek().kind == "punct":
            self.advance()
            self.advance()
            return A.Assign(A.Var(tok.text, pos=pos), self.rhs(), pos=pos)
        return A.RhsInstr(self.rhs(), pos=pos)

    def _check_distinct_vars(self, fields, tok):
        seen = set()
        for _, x in fields:
            if x in seen:
                raise self.error(f"variable {x!r} bound twice in pattern", tok)
            seen.add(x)

    def _match(self, body):
        self.expect("match")
        scrut = self.ident("variable")
        self.expect("with")
        if self.at("|"):
            self.advance()
        branches = []
        while True:
            c = self.ctor_name()
            binder = self.ident("pattern variable")
            self.expect("->")
            branches.append((c, binder, body()))
            if self.at("|"):
                self.advance()
                continue
            self.expect("end")
            return scrut, tuple(branches)

    # ------------------------------------------------------------------ rhs

    def _arg_start(self, tok: Token) -> bool:
        if tok.kind in ("ident", "int", "string"):
            return True
        return (tok.kind == "kw" and tok.text in ("True", "False")) or (
            tok.kind == "punct" and tok.text in ("{", "(")
        )

    def rhs(self) -> A.Rhs:
        tok = self.tok
        pos = tok.pos
        if self.at("match"):
            scrut, branches = self._match(self.rhs)
            return A.MatchRhs(scrut, branches, pos=pos)
        if self.at("update"):
            self.advance()
            m = self.ident("variable")
            k = self.ident("variable")
            v = self.ident("variable")
            return A.MapUpdate(m, k, v, pos=pos)
        if self.at("{") and self.peek().kind == "ident" and self.peek(2).text == "with":
            self.advance()
            var = self.ident("variable")
            self.expect("with")
            fields = self._labelled("=", "}", lambda: self.ident("variable"))
            if not fields:
                raise self.error("record update needs at least one field")
            return A.Update(var, tuple(fields), pos=pos)
        if tok.kind == "kw" and tok.text in ("True", "False") and self._arg_start(self.peek()):
            self.advance()
            arg = self.arg()
            annot = None
            if self.at(":"):
                self.advance()
                annot = self.type()
            return A.Construct(tok.text, arg, annot, pos=pos)
        if tok.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "punct":
                if nxt.text == ".":
                    self.advance()
                    self.advance()
                    return A.Proj(tok.text, self.ident("field label"), pos=pos)
                if nxt.text == "[":
                    self.advance()
                    self.advance()
                    key = self.ident("variable")
                    self.expect("]")
                    return A.BinOp("mapget", tok.text, key, pos=pos)
                if nxt.text in ("+", ">="):
                    self.advance()
                    self.advance()
                    right = self.ident("variable")
                    return A.BinOp("add" if nxt.text == "+" else "ge", tok.text, right, pos=pos)
            if self._arg_start(nxt):
                self.advance()
                arg = self.arg()
                if tok.text[0].isupper():
                    annot = None
                    if self.at(":"):
                        self.advance()
                        annot = self.type()
                    return A.Construct(tok.text, arg, annot, pos=pos)
                return A.Apply(tok.text, arg, pos=pos)
            if tok.text == "amount":
                self.advance()
                return A.Apply("amount", A.RecordArg((), pos=pos), pos=pos)
        return A.ArgRhs(self.arg(), pos=pos)

    def arg(self) -> A.Arg:
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            return A.Var(tok.text, pos=tok.pos)
        if self.at("{"):
            return self._brace_arg()
        return A.Val(self.value(), pos=tok.pos)

    def _brace_arg(self) -> A.Arg:
        """``{ l = x ; ... }`` is a record of variables; anything else a value."""
        tok = self.tok
        raw = self._raw_brace(allow_vars=True)
        if raw[0] == "recordarg":
            return A.RecordArg(tuple(raw[1]), pos=tok.pos)
        return A.Val(self._resolve(raw, None, tok), pos=tok.pos)

    # --------------------------------------------------------------- values

    def value(self, expected: A.AlbertType | None = None) -> A.Value:
        tok = self.tok
        raw = self._raw_value()
        return self._resolve(raw, expected, tok)

    def _value_start(self, tok: Token) -> bool:
        return tok.kind in ("int", "string", "ident") or (
            tok.kind == "kw" and tok.text in ("True", "False")
        ) or (tok.kind == "punct" and tok.text in ("{", "[", "("))

    def _raw_value(self, allow_ctor_arg: bool = True):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            return ("num", int(tok.text), tok.text.startswith("-"), tok)
        if tok.kind == "string":
            self.advance()
            return ("string", unescape(tok.text), tok)
        if tok.kind == "kw" and tok.text in ("True", "False"):
            self.advance()
            return ("bool", tok.text == "True", tok)
        if self.at("("):
            self.advance()
            inner = self._raw_value()
            if self.at(":"):
                self.advance()
                ty = self.type()
                self.expect(")")
                return ("ascribe", inner, ty, tok)
            self.expect(")")
            return inner
        if self.at("["):
            self.advance()
            elems = []
            while not self.at("]"):
                elems.append(self._raw_value())
                if self.at(";"):
                    self.advance()
                elif not self.at("]"):
                    raise self.error(f"expected ';' or ']', found {self.tok.text!r}")
            self.advance()
            return ("list", elems, tok)
        if self.at("{"):
            return self._raw_brace(allow_vars=False)
        if tok.kind == "ident":
            self.advance()
            payload = None
            if allow_ctor_arg and self._value_start(self.tok):
                payload = self._raw_value(allow_ctor_arg=False) if self.tok.kind == "ident" else self._raw_value()
            return ("ctor", tok.text, payload, tok)
        raise self.error(f"expected a value, found {tok.text or 'end of input'!r}")

    def _raw_brace(self, allow_vars: bool):
        tok = self.expect("{")
        if self.at("Elt"):
            entries = []
            while self.at("Elt"):
                self.advance()
                k = self._raw_value(allow_ctor_arg=False)
                v = self._raw_value(allow_ctor_arg=False)
                entries.append((k, v))
                if self.at(";"):
                    self.advance()
                elif not self.at("}"):
                    raise self.error(f"expected ';' or '}}', found {self.tok.text!r}")
            self.expect("}")
            return ("map", entries, tok)

        def item():
            t = self.tok
            nxt = self.peek()
            if allow_vars and t.kind == "ident" and nxt.kind == "punct" and nxt.text in (";", "}"):
                self.advance()
                return ("var", t.text)
            return self._raw_value()

        fields = self._labelled("=", "}", item)
        is_var = [isinstance(v, tuple) and v[0] == "var" for _, v in fields]
        if allow_vars and (not fields or all(is_var)):
            return ("recordarg", [(l, v[1]) for l, v in fields], tok)
        if any(is_var):
            raise self.error("record mixes variables and literal values", tok)
        return ("record", fields, tok)

    # ------------------------------------------------------- value typing

    def _expand(self, ty: A.AlbertType, tok: Token) -> A.AlbertType:
        try:
            return T.normalize_type(T.expand_aliases(ty, self.aliases))
        except AlbertTypeError as exc:
            raise self.error(str(exc), tok)

    def _resolve(self, raw, expected: A.AlbertType | None, tok: Token) -> A.Value:
        """Turn a raw literal into a typed value, using ``expected`` when given.

        ``expected`` is kept as written inside the resulting value (aliases are
        removed later by the alias-inlining pass); it is expanded here only to
        check the literal against it.
        """
        kind = raw[0]
        tok = raw[-1] if isinstance(raw[-1], Token) else tok
        shape = self._expand(expected, tok) if expected is not None else None

        def fail(msg):
            return self.error(msg, tok)

        if kind == "ascribe":
            _, inner, ty, _ = raw
            v = self._resolve(inner, ty, tok)
            if shape is not None and self._expand(T.value_type(v), tok) != shape:
                raise fail("ascribed type does not match the expected type")
            return v
        if kind == "num":
            _, n, signed, _ = raw
            if shape is None:
                return A.IntVal(n) if signed else A.NatVal(n)
            if shape == A.INT:
                return A.IntVal(n)
            if shape == A.NAT and not signed:
                return A.NatVal(n)
            if shape == A.MUTEZ and not signed:
                if n >= A.MUTEZ_BOUND:
                    raise fail(f"mutez literal {n} out of range")
                return A.MutezVal(n)
            raise fail(f"integer literal {n} cannot have type {_show(expected)}")
        if kind == "string":
            if shape not in (None, A.STRING):
                raise fail(f"string literal cannot have type {_show(expected)}")
            return A.StringVal(raw[1])
        if kind == "bool":
            if shape not in (None, A.BOOL):
                raise fail(f"boolean literal cannot have type {_show(expected)}")
            return A.BoolVal(raw[1])
        if kind == "record":
            fields = raw[1]
            if isinstance(shape, A.MapTy) and not fields:
                return A.MapVal((), expected_part(expected, shape, "key"), expected_part(expected, shape, "val"))
            if shape is None:
                return A.RecordVal(tuple(sorted((l, self._resolve(v, None, tok)) for l, v in fields)))
            if not isinstance(shape, A.RecordTy):
                raise fail(f"record literal cannot have type {_show(expected)}")
            if sorted(l for l, _ in fields) != sorted(shape.labels()):
                raise fail(f"record literal fields do not match type {_show(expected)}")
            written = self._written_record(expected)
            return A.RecordVal(
                tuple(sorted((l, self._resolve(v, written.get(l) if written else shape.get(l), tok)) for l, v in fields))
            )
        if kind == "recordarg":
            if raw[1]:
                raise fail("expected a literal value, found variables")
            return self._resolve(("record", [], tok), expected, tok)
        if kind == "list":
            elems = raw[1]
            if shape is None:
                if not elems:
                    raise fail("empty list literal needs a type ascription, e.g. ([] : list nat)")
                first = self._resolve(elems[0], None, tok)
                ety = T.value_type(first)
                rest = [self._resolve(e, ety, tok) for e in elems[1:]]
                return A.ListVal((first, *rest), ety)
            if not isinstance(shape, A.ListTy):
                raise fail(f"list literal cannot have type {_show(expected)}")
            ety = expected_part(expected, shape, "elem")
            return A.ListVal(tuple(self._resolve(e, ety, tok) for e in elems), ety)
        if kind == "map":
            entries = raw[1]
            if shape is None:
                if not entries:
                    raise fail("empty map literal needs a type ascription")
                k0 = self._resolve(entries[0][0], None, tok)
                v0 = self._resolve(entries[0][1], None, tok)
                kty, vty = T.value_type(k0), T.value_type(v0)
            elif isinstance(shape, A.MapTy):
                kty, vty = expected_part(expected, shape, "key"), expected_part(expected, shape, "val")
            else:
                raise fail(f"map literal cannot have type {_show(expected)}")
            kvs = [(self._resolve(k, kty, tok), self._resolve(v, vty, tok)) for k, v in entries]
            try:
                kvs.sort(key=lambda kv: A.sort_key(kv[0]))
            except ValueError:
                raise fail("map keys must be comparable")
            for (a, _), (b, _) in zip(kvs, kvs[1:]):
                if a == b:
                    raise fail("duplicate key in map literal")
            return A.MapVal(tuple(kvs), kty, vty)
        if kind == "ctor":
            _, c, payload, _ = raw
            if shape is None:
                if c == "Some" and payload is not None:
                    return A.SomeVal(self._resolve(payload, None, tok))
                raise fail(f"constructor {c} needs a type ascription, e.g. ({c} ... : ty)")
            if isinstance(shape, A.OptionTy):
                ety = expected_part(expected, shape, "elem")
                if c == "Some" and payload is not None:
                    return A.SomeVal(self._resolve(payload, ety, tok))
                if c == "None" and (payload is None or _is_empty_record(payload)):
                    return A.NoneVal(ety)
                raise fail(f"{c} is not a constructor of {_show(expected)}")
            if isinstance(shape, A.VariantTy):
                pty = shape.get(c)
                if pty is None:
                    raise fail(f"{c} is not a constructor of {_show(expected)}")
                if payload is None:
                    if pty != A.UNIT:
                        raise fail(f"constructor {c} expects an argument")
                    return A.VariantVal(c, A.RecordVal(()), expected)
                written = self._written_variant(expected)
                return A.VariantVal(c, self._resolve(payload, written.get(c) if written else pty, tok), expected)
            raise fail(f"constructor {c} cannot build a value of type {_show(expected)}")
        raise fail("unsupported literal")

    def _written_record(self, ty):
        ty = self._unalias(ty)
        return ty if isinstance(ty, A.RecordTy) else None

    def _written_variant(self, ty):
        ty = self._unalias(ty)
        return ty if isinstance(ty, A.VariantTy) else None

    def _unalias(self, ty):
        seen = set()
        while isinstance(ty, A.Alias) and ty.name in self.aliases and ty.name not in seen:
            seen.add(ty.name)
            ty = self.aliases[ty.name]
        return ty


def expected_part(written: A.AlbertType, shape: A.AlbertType, part: str) -> A.AlbertType:
    """Sub-type of an ascription, preferring the as-written form when visible."""
    if type(written) is type(shape):
        return getattr(written, part)
    return getattr(shape, part)


def _is_empty_record(raw) -> bool:
    return raw[0] in ("record", "recordarg") and not raw[1]


def _show(ty) -> str:
    from .printer import print_type

    return print_type(ty)


def parse_program(source: str) -> A.Program:
    """Parse an Albert source text; raises ParseError on any syntax violation."""
    return Parser(source).program()


def parse_value(source: str, expected: A.AlbertType | None = None, aliases: dict | None = None) -> A.Value:
    """Parse a literal value, checked against ``expected`` when given."""
    p = Parser(source, aliases)
    v = p.value(expected)
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after value")
    return v


def parse_type(source: str) -> A.AlbertType:
    p = Parser(source)
    t = p.type()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after type")
    return t
