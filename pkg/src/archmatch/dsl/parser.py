"""Recursive-descent parser for ADL units and protocol expressions.

The parser is total: any input yields either a syntax tree or a list of
error diagnostics (often both ends of a unit are salvageable; on error inside
one declaration it resynchronizes at the next top-level declaration keyword).
"""

from __future__ import annotations

from ..diagnostics import ERROR, WARNING, Diagnostic, Span, attach_path
from ..protocol import Alt, Eps, Ev, ProtocolExpr, Seq, Shuffle, Star, events
from . import syntax
from .tokens import DECL_KEYWORDS, EOF, ERROR as T_ERROR, IDENT, STRING, SourceUnit, Token, tokenize

_ANNOT_KEYS = ("guard", "pre", "post", "design")


class _ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


class _Reader:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0  # brace depth of consumed tokens, for resynchronization

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at(self, *kinds: str) -> bool:
        return self.current.kind in kinds

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != EOF:
            self.pos += 1
            if tok.kind == "{":
                self.depth += 1
            elif tok.kind == "}":
                self.depth = max(0, self.depth - 1)
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.current
        if tok.kind == kind:
            return self.advance()
        if tok.kind == EOF and self.depth > 0:
            raise _ParseError(Diagnostic(
                ERROR, tok.span, f'unclosed block: expected "{kind}" before end of file',
                "unclosed-block"))
        expected = what or f'"{kind}"'
        found = tok.text if tok.text else "end of file"
        raise _ParseError(Diagnostic(
            ERROR, tok.span, f"expected {expected}, found {found!r}", "unexpected-token"))

    def expect_ident(self, what: str) -> Token:
        tok = self.current
        if tok.kind == IDENT:
            return self.advance()
        raise _ParseError(Diagnostic(
            ERROR, tok.span, f"expected {what}, found {tok.text or 'end of file'!r}",
            "unexpected-token"))

    def sync_to_declaration(self) -> None:
        while not self.at(EOF):
            if self.depth == 0 and self.current.kind in DECL_KEYWORDS:
                return
            self.advance()


def _extent(start: Span, end: Span) -> Span:
    return Span(start.line, start.column, start.offset,
                end.offset + end.length - start.offset)


# --- protocol expressions ----------------------------------------------------

def _starts_atom(r: _Reader) -> bool:
    return r.at("?", "(")


def _parse_atom(r: _Reader) -> ProtocolExpr:
    if r.at("?"):
        r.advance()
        name = r.expect_ident("event name")
        return Ev(name.text)
    r.expect("(", 'event "?name" or "("')
    if r.at(")"):
        r.advance()
        return Eps()
    inner = _parse_shuffle(r)
    r.expect(")")
    return inner


def _parse_rep(r: _Reader) -> ProtocolExpr:
    e = _parse_atom(r)
    while r.at("*"):
        r.advance()
        e = Star(e)
    return e


def _parse_seq(r: _Reader) -> ProtocolExpr:
    parts = [_parse_rep(r)]
    while True:
        if r.at(";"):
            r.advance()
            parts.append(_parse_rep(r))
        elif _starts_atom(r):
            parts.append(_parse_rep(r))
        else:
            break
    out = parts[-1]
    for e in reversed(parts[:-1]):
        out = Seq(e, out)
    return out


def _parse_alt(r: _Reader) -> ProtocolExpr:
    parts = [_parse_seq(r)]
    while r.at("+"):
        r.advance()
        parts.append(_parse_seq(r))
    out = parts[-1]
    for e in reversed(parts[:-1]):
        out = Alt(e, out)
    return out


def _parse_shuffle(r: _Reader) -> ProtocolExpr:
    parts = [_parse_alt(r)]
    while r.at("|"):
        r.advance()
        parts.append(_parse_alt(r))
    out = parts[-1]
    for e in reversed(parts[:-1]):
        out = Shuffle(e, out)
    return out


def _parse_protocol_block(r: _Reader) -> tuple[ProtocolExpr, Span]:
    """Parse `{ protoExpr }`; an empty block denotes the empty word."""
    open_tok = r.expect("{")
    if r.at("}"):
        close = r.advance()
        return Eps(), _extent(open_tok.span, close.span)
    expr = _parse_shuffle(r)
    close = r.expect("}")
    return expr, _extent(open_tok.span, close.span)


def parse_protocol(text: str, alphabet: set[str] | frozenset[str] | None = None,
                   ) -> tuple[ProtocolExpr | None, list[Diagnostic]]:
    """Parse a standalone protocol expression.

    Event names outside `alphabet` (when given) yield warning diagnostics,
    not errors: units are routinely parsed before name resolution.
    """
    reader = _Reader(tokenize(SourceUnit("<protocol>", text)))
    try:
        if reader.at(EOF):
            expr: ProtocolExpr = Eps()
        else:
            expr = _parse_shuffle(reader)
            if not reader.at(EOF):
                tok = reader.current
                raise _ParseError(Diagnostic(
                    ERROR, tok.span, f"unexpected {tok.text!r} after protocol expression",
                    "unexpected-token"))
    except _ParseError as err:
        return None, [err.diagnostic]
    diagnostics: list[Diagnostic] = []
    if alphabet is not None:
        zero = Span(1, 1, 0, max(len(text), 1))
        for name in sorted(events(expr) - frozenset(alphabet)):
            diagnostics.append(Diagnostic(
                WARNING, zero, f"event {name!r} is not a known method", "unknown-event"))
    return expr, diagnostics


# --- declarations ------------------------------------------------------------

def _parse_annot(r: _Reader) -> syntax.Annot | None:
    if not r.at("["):
        return None
    r.advance()
    values: dict[str, str] = {}
    while not r.at("]"):
        key = r.expect_ident("annotation key (guard, pre, post, design)")
        if key.text not in _ANNOT_KEYS:
            raise _ParseError(Diagnostic(
                ERROR, key.span, f"unknown annotation key {key.text!r}", "bad-annotation"))
        if key.text in values:
            raise _ParseError(Diagnostic(
                ERROR, key.span, f"duplicate annotation key {key.text!r}", "bad-annotation"))
        r.expect(":")
        values[key.text] = r.expect(STRING, "string").value
    r.expect("]")
    if not values:
        return None
    return syntax.Annot(values.get("guard"), values.get("pre"),
                        values.get("post"), values.get("design"))


def _parse_method(r: _Reader) -> syntax.MethodDecl:
    name = r.expect_ident("method name")
    r.expect("(")
    params: list[syntax.ParamDecl] = []
    if not r.at(")"):
        while True:
            pname = r.expect_ident("parameter name")
            r.expect(":")
            ptype = r.expect_ident("parameter type")
            params.append(syntax.ParamDecl(pname.text, ptype.text,
                                           _extent(pname.span, ptype.span)))
            if r.at(","):
                r.advance()
            else:
                break
    r.expect(")")
    return_type = None
    if r.at(":"):
        r.advance()
        return_type = r.expect_ident("return type").text
    annot = _parse_annot(r)
    semi = r.expect(";")
    return syntax.MethodDecl(name.text, tuple(params), return_type, annot,
                             _extent(name.span, semi.span))


def _parse_type(r: _Reader) -> syntax.TypeDecl:
    kw = r.expect("type")
    name = r.expect_ident("type name")
    supertype = None
    if r.at("<:"):
        r.advance()
        supertype = r.expect_ident("supertype name").text
    semi = r.expect(";")
    return syntax.TypeDecl(name.text, supertype, _extent(kw.span, semi.span))


def _parse_interface(r: _Reader) -> syntax.InterfaceDecl:
    kw = r.expect("interface")
    name = r.expect_ident("interface name")
    extends = None
    if r.at("extends"):
        r.advance()
        extends = r.expect_ident("base interface name").text
    r.expect("{")
    fields: list[syntax.FieldDecl] = []
    methods: list[syntax.MethodDecl] = []
    while not r.at("}"):
        if r.at("field"):
            fkw = r.advance()
            fname = r.expect_ident("field name")
            r.expect(":")
            ftype = r.expect_ident("field type")
            semi = r.expect(";")
            fields.append(syntax.FieldDecl(fname.text, ftype.text, _extent(fkw.span, semi.span)))
        elif r.at(IDENT):
            methods.append(_parse_method(r))
        else:
            r.expect("}", 'field or method declaration, or "}"')
    close = r.advance()
    return syntax.InterfaceDecl(name.text, extends, tuple(fields), tuple(methods),
                                _extent(kw.span, close.span))


def _parse_contract(r: _Reader) -> syntax.ContractDecl:
    kw = r.expect("contract")
    name = r.expect_ident("contract name")
    r.expect("implements")
    implements = r.expect_ident("interface name")
    r.expect("{")
    incomplete = False
    if r.at("incomplete"):
        r.advance()
        r.expect(";")
        incomplete = True
    init = None
    if r.at("init"):
        r.advance()
        r.expect("{")
        init = r.expect(STRING, "string").value
        r.expect("}")
    methods: list[syntax.MethodDecl] = []
    while r.at("method"):
        r.advance()
        methods.append(_parse_method(r))
    protocol = None
    protocol_span = None
    if r.at("protocol"):
        r.advance()
        protocol, protocol_span = _parse_protocol_block(r)
    close = r.expect("}")
    return syntax.ContractDecl(name.text, implements.text, incomplete, init,
                               tuple(methods), protocol,
                               _extent(kw.span, close.span), protocol_span)


def _parse_component_body(r: _Reader, kw: Token, name: Token, node_cls):
    r.expect("{")
    r.expect("provided")
    r.expect("contract")
    provided = r.expect_ident("contract name")
    internal = None
    required = None
    if r.at("internal"):
        r.advance()
        r.expect("interface")
        internal = r.expect_ident("interface name").text
    if r.at("required"):
        r.advance()
        r.expect("interface")
        required = r.expect_ident("interface name").text
    causal = None
    causal_span = None
    if r.at("causal"):
        r.advance()
        causal, causal_span = _parse_protocol_block(r)
    close = r.expect("}")
    return node_cls(name.text, provided.text, internal, required, causal,
                    _extent(kw.span, close.span), causal_span)


def _parse_architecture(r: _Reader) -> syntax.ArchitectureDecl:
    kw = r.expect("architecture")
    if r.at(syntax.BUSINESS):
        kind = syntax.BUSINESS
    elif r.at(syntax.APPLICATION):
        kind = syntax.APPLICATION
    else:
        tok = r.current
        raise _ParseError(Diagnostic(
            ERROR, tok.span, f'expected "business" or "application", found {tok.text!r}',
            "unexpected-token"))
    r.advance()
    name = r.expect_ident("architecture name")
    r.expect("{")
    objects: list[syntax.ObjectRef] = []
    while r.at("object"):
        r.advance()
        oname = r.expect_ident("object name")
        r.expect(";")
        objects.append(syntax.ObjectRef(oname.text, oname.span))
    morphisms: list[syntax.MorphismDecl] = []
    while r.at("morphism"):
        mkw = r.advance()
        src = r.expect_ident("object name")
        r.expect("-")
        mkind = r.expect_ident("morphism kind")
        r.expect("->")
        dst = r.expect_ident("object name")
        semi = r.expect(";")
        morphisms.append(syntax.MorphismDecl(src.text, mkind.text, dst.text,
                                             _extent(mkw.span, semi.span)))
    close = r.expect("}")
    return syntax.ArchitectureDecl(kind, name.text, tuple(objects), tuple(morphisms),
                                   _extent(kw.span, close.span))


def _parse_link(r: _Reader) -> syntax.LinkDecl:
    kw = r.expect("link")
    name = r.expect_ident("link name")
    r.expect("from")
    source = r.expect_ident("architecture name")
    r.expect("to")
    target = r.expect_ident("architecture name")
    r.expect("{")
    object_map: list[syntax.MapEntry] = []
    while r.at("map"):
        mkw = r.advance()
        src = r.expect_ident("object name")
        r.expect("->")
        dst = r.expect_ident("object name")
        semi = r.expect(";")
        object_map.append(syntax.MapEntry(src.text, dst.text, _extent(mkw.span, semi.span)))
    generator_map: list[syntax.GeneratorEntry] = []
    while r.at("generator"):
        gkw = r.advance()
        src = r.expect_ident("morphism kind")
        r.expect("->")
        dst = r.expect_ident("morphism kind")
        semi = r.expect(";")
        generator_map.append(syntax.GeneratorEntry(src.text, dst.text,
                                                   _extent(gkw.span, semi.span)))
    close = r.expect("}")
    return syntax.LinkDecl(name.text, source.text, target.text,
                           tuple(object_map), tuple(generator_map),
                           _extent(kw.span, close.span))


def parse_unit(unit: SourceUnit) -> tuple[syntax.SyntaxTree | None, list[Diagnostic]]:
    """Parse one ADL unit.

    Returns (tree, diagnostics); the tree is None whenever any diagnostic is
    an error.  Resynchronizes after a bad declaration so every broken
    declaration in the unit is reported.
    """
    reader = _Reader(tokenize(unit))
    declarations: list[syntax.Declaration] = []
    diagnostics: list[Diagnostic] = []
    while not reader.at(EOF):
        tok = reader.current
        try:
            if tok.kind == T_ERROR:
                raise _ParseError(Diagnostic(
                    ERROR, tok.span, f"unexpected characters {tok.text!r}", "bad-character"))
            if tok.kind == "type":
                declarations.append(_parse_type(reader))
            elif tok.kind == "interface":
                declarations.append(_parse_interface(reader))
            elif tok.kind == "contract":
                declarations.append(_parse_contract(reader))
            elif tok.kind == "component":
                kw = reader.advance()
                name = reader.expect_ident("component name")
                declarations.append(_parse_component_body(reader, kw, name, syntax.ComponentDecl))
            elif tok.kind == "publication":
                kw = reader.advance()
                name = reader.expect_ident("publication name")
                declarations.append(_parse_component_body(reader, kw, name, syntax.PublicationDecl))
            elif tok.kind == "architecture":
                declarations.append(_parse_architecture(reader))
            elif tok.kind == "link":
                declarations.append(_parse_link(reader))
            else:
                raise _ParseError(Diagnostic(
                    ERROR, tok.span,
                    f"expected a declaration (type, interface, contract, component, "
                    f"publication, architecture, link), found {tok.text or 'end of file'!r}",
                    "unexpected-token"))
        except _ParseError as err:
            diagnostics.append(err.diagnostic)
            if reader.current is tok:  # error at the very first token: step over it
                reader.advance()
            reader.sync_to_declaration()
    diagnostics = attach_path(diagnostics, unit.path)
    if any(d.severity == ERROR for d in diagnostics):
        return None, diagnostics
    return syntax.SyntaxTree(tuple(declarations), unit.path), diagnostics
