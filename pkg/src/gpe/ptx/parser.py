"""Recursive-descent parser for the supported PTX subset."""

from __future__ import annotations

import logging

from gpe.errors import ParseError, UndeclaredRegister, UnresolvedLabel
from gpe.ptx.ast import (
    SPECIAL_REGISTERS,
    STATE_SPACES,
    Address,
    Guard,
    Immediate,
    Instruction,
    KernelDef,
    Label,
    Param,
    ParamDecl,
    PtxProgram,
    RegDecl,
    Register,
    SpecialRegister,
    VarDecl,
    Vector,
)
from gpe.ptx.lexer import Token, tokenize
from gpe.ptx.opcodes import SCALAR_WIDTHS, classify, scalar_kinds

log = logging.getLogger(__name__)


_LINKAGE = (".visible", ".weak", ".extern")
_VAR_SPACES = (".shared", ".local", ".global", ".const")


class _Parser:
    def __init__(self, tokens, strict):
        self.tokens = tokens
        self.pos = 0
        self.strict = strict
        self.warnings = []

    # -- token helpers --------------------------------------------------------

    def peek(self, offset=0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1].line if self.tokens else 1
            raise ParseError(last, "more input", "end of file")
        self.pos += 1
        return tok

    def at(self, kind, text=None):
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind, text=None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            line = tok.line if tok else (self.tokens[-1].line if self.tokens else 1)
            raise ParseError(line, text or kind, tok.text if tok else "end of file")
        self.pos += 1
        return tok

    def warn(self, tok, what):
        msg = f"line {tok.line}: skipped {what}"
        self.warnings.append(msg)
        log.warning(msg)

    def skip_statement(self):
        """Skip the current statement: up to ';', through a balanced block, or to end of line.

        Line-oriented directives such as ``.file`` and ``.loc`` carry no ';'.
        """
        line = self.peek().line
        depth = 0
        while True:
            nxt = self.peek()
            if nxt is None or (depth == 0 and nxt.line != line and nxt.kind != "LBrace"):
                return
            tok = self.next()
            if tok.kind == "LBrace":
                depth += 1
            elif tok.kind == "RBrace":
                depth -= 1
                if depth == 0:
                    if self.at("Semi"):
                        self.pos += 1
                    return
            elif tok.kind == "Semi" and depth == 0:
                return

    # -- program --------------------------------------------------------------

    def program(self) -> PtxProgram:
        version = ""
        target = ""
        address_size = None
        kernels = []
        while self.peek() is not None:
            tok = self.peek()
            if tok.kind != "Directive":
                raise ParseError(tok.line, "directive", tok.text)
            if tok.text == ".version":
                self.pos += 1
                version = self.next().text
            elif tok.text == ".target":
                self.pos += 1
                parts = [self.expect("Ident").text]
                while self.at("Comma"):
                    self.pos += 1
                    parts.append(self.expect("Ident").text)
                target = ", ".join(parts)
            elif tok.text == ".address_size":
                self.pos += 1
                address_size = self.expect("Int").value
            elif tok.text in _LINKAGE or tok.text == ".entry":
                while self.peek().text in _LINKAGE:
                    self.pos += 1
                head = self.peek()
                if head.text == ".entry":
                    kernels.append(self.kernel())
                else:
                    self.warn(head, f"{head.text} definition")
                    self.skip_statement()
            else:
                self.warn(tok, f"directive {tok.text}")
                self.skip_statement()
        names = [k.name for k in kernels]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ParseError(kernels[0].line, "unique kernel names", sorted(dupes)[0])
        return PtxProgram(version=version, target=target, kernels=tuple(kernels),
                          address_size=address_size, warnings=tuple(self.warnings))

    def kernel(self) -> KernelDef:
        start = self.expect("Directive", ".entry")
        name = self.expect("Ident").text
        params = []
        self.expect("LParen")
        while not self.at("RParen"):
            params.append(self.param_decl())
            if self.at("Comma"):
                self.pos += 1
        self.expect("RParen")
        # performance-tuning directives (.maxntid 256,1,1 etc.) carry no semantics here
        while not self.at("LBrace"):
            tok = self.next()
            if tok.kind == "Semi":
                raise ParseError(tok.line, "kernel body", ";")
        self.expect("LBrace")
        return self.kernel_body(name, params, start.line)

    def param_decl(self) -> ParamDecl:
        self.expect("Directive", ".param")
        kind = None
        while self.at("Directive"):
            d = self.next().text[1:]
            if d == "align":
                self.expect("Int")
            elif d in SCALAR_WIDTHS:
                kind = d
        tok = self.expect("Ident")
        if kind is None:
            raise ParseError(tok.line, "parameter type", tok.text)
        count = 1
        if self.at("LBrack"):
            self.pos += 1
            count = self.expect("Int").value
            self.expect("RBrack")
        return ParamDecl(tok.text, kind, SCALAR_WIDTHS[kind], count)

    # -- kernel body ----------------------------------------------------------

    def kernel_body(self, name, params, line) -> KernelDef:
        body = []
        labels = {}
        registers = []
        variables = []
        depth = 1
        while depth:
            tok = self.next()
            if tok.kind == "RBrace":
                depth -= 1
            elif tok.kind == "LBrace":
                depth += 1
            elif tok.kind == "Directive":
                if tok.text == ".reg":
                    registers.extend(self.reg_decl(tok))
                elif tok.text in _VAR_SPACES:
                    variables.append(self.var_decl(tok))
                else:
                    self.warn(tok, f"directive {tok.text}")
                    self.skip_line_directive(tok)
            elif tok.kind == "Ident" and self.at("Colon"):
                self.pos += 1
                if tok.text in labels:
                    raise ParseError(tok.line, "unique label", tok.text)
                labels[tok.text] = len(body)
            elif tok.kind in ("Ident", "At"):
                self.pos -= 1
                body.append(self.instruction(len(body)))
            else:
                raise ParseError(tok.line, "instruction, label or directive", tok.text)

        kernel = KernelDef(name=name, params=tuple(params), registers=tuple(registers),
                           body=tuple(body), labels=labels, variables=tuple(variables),
                           line=line)
        _validate(kernel)
        return kernel

    def skip_line_directive(self, tok):
        # .loc / .pragma etc: consume tokens up to ';' or the end of the source line
        while self.peek() is not None and self.peek().line == tok.line:
            t = self.next()
            if t.kind == "Semi":
                return

    def reg_decl(self, tok):
        kind_tok = self.expect("Directive")
        kind = kind_tok.text[1:]
        if kind not in SCALAR_WIDTHS:
            raise ParseError(kind_tok.line, "register type", kind_tok.text)
        decls = []
        while True:
            reg = self.expect("Reg")
            if self.at("Lt"):
                self.pos += 1
                count = self.expect("Int").value
                self.expect("Gt")
                decls.append(RegDecl(reg.text, kind, count))
            else:
                decls.append(RegDecl(reg.text, kind))
            if self.at("Comma"):
                self.pos += 1
                continue
            self.expect("Semi")
            return decls

    def var_decl(self, tok) -> VarDecl:
        space = tok.text[1:]
        align = None
        kind = None
        while self.at("Directive"):
            d = self.next().text[1:]
            if d == "align":
                align = self.expect("Int").value
            elif d in SCALAR_WIDTHS:
                kind = d
        name = self.expect("Ident")
        if kind is None:
            raise ParseError(name.line, "variable type", name.text)
        count = 1
        if self.at("LBrack"):
            self.pos += 1
            count = self.expect("Int").value
            self.expect("RBrack")
        if not self.at("Semi"):
            # initializers are irrelevant to counting
            self.warn(name, f"initializer of {name.text}")
            while not self.at("Semi"):
                self.next()
        self.expect("Semi")
        return VarDecl(name.text, space, kind, count, align)

    # -- instructions ---------------------------------------------------------

    def instruction(self, index) -> Instruction:
        guard = None
        if self.at("At"):
            self.pos += 1
            negated = False
            if self.at("Bang"):
                self.pos += 1
                negated = True
            guard = Guard(self.expect("Reg").text, negated)
        head = self.expect("Ident")
        opcode, *mods = head.text.split(".")
        modifiers = tuple(mods)
        category = classify(opcode, modifiers, strict=self.strict)

        operands = []
        if not self.at("Semi"):
            operands.append(self.operand(opcode))
            while self.at("Comma"):
                self.pos += 1
                operands.append(self.operand(opcode))
        self.expect("Semi")

        kinds = scalar_kinds(modifiers)
        dtype = kinds[0] if kinds else None
        if opcode in ("ld", "st"):
            space = next((m for m in modifiers if m in STATE_SPACES), "global")
            operands = [_with_space(op, space) for op in operands]

        if opcode == "bra":
            if len(operands) != 1 or not isinstance(operands[0], Label):
                raise ParseError(head.line, "exactly one label operand", head.text)
            dst, srcs = None, tuple(operands)
        elif opcode in ("ret", "exit", "bar"):
            dst, srcs = None, tuple(operands)
        elif not operands:
            raise ParseError(head.line, "operands", ";")
        else:
            dst, srcs = operands[0], tuple(operands[1:])
        return Instruction(index=index, opcode=opcode, modifiers=modifiers, dtype=dtype,
                           dst=dst, srcs=srcs, category=category, guard=guard,
                           line=head.line)

    def operand(self, opcode):
        tok = self.next()
        if tok.kind == "Reg":
            if tok.text in SPECIAL_REGISTERS:
                return SpecialRegister(tok.text)
            return Register(tok.text)
        if tok.kind == "Bang":
            return Register(self.expect("Reg").text, negated=True)
        if tok.kind in ("Int", "Float"):
            return Immediate(tok.text, tok.value)
        if tok.kind == "Minus":
            num = self.next()
            if num.kind not in ("Int", "Float"):
                raise ParseError(num.line, "number after '-'", num.text)
            return Immediate("-" + num.text, -num.value)
        if tok.kind == "Ident":
            return Label(tok.text) if opcode == "bra" else Param(tok.text)
        if tok.kind == "LBrack":
            return self.address()
        if tok.kind == "LBrace":
            items = [self.operand(opcode)]
            while self.at("Comma"):
                self.pos += 1
                items.append(self.operand(opcode))
            self.expect("RBrace")
            return Vector(tuple(items))
        raise ParseError(tok.line, "operand", tok.text)

    def address(self) -> Address:
        tok = self.next()
        if tok.kind == "Reg":
            base = Register(tok.text)
        elif tok.kind == "Ident":
            base = Param(tok.text)
        elif tok.kind == "Int":
            base = Immediate(tok.text, tok.value)
        else:
            raise ParseError(tok.line, "address base", tok.text)
        offset = 0
        if self.at("Plus") or self.at("Minus"):
            sign = -1 if self.next().kind == "Minus" else 1
            if self.at("Minus"):
                self.pos += 1
                sign = -sign
            offset = sign * self.expect("Int").value
        self.expect("RBrack")
        return Address(base, offset, "global")


def _with_space(op, space):
    if isinstance(op, Address):
        return Address(op.base, op.offset, space)
    return op


def _registers_in(op):
    if isinstance(op, Register):
        yield op.name
    elif isinstance(op, Address):
        yield from _registers_in(op.base)
    elif isinstance(op, Vector):
        for item in op.items:
            yield from _registers_in(item)


def _validate(kernel: KernelDef):
    declared = kernel.declared_registers()
    for ins in kernel.body:
        if ins.is_branch and ins.label not in kernel.labels:
            raise UnresolvedLabel(ins.label, ins.line)
        names = []
        if ins.guard is not None:
            names.append(ins.guard.register)
        for op in (ins.dst, *ins.srcs):
            names.extend(_registers_in(op))
        for reg in names:
            if reg not in declared:
                raise UndeclaredRegister(reg, ins.line)


def parse(source: str, strict: bool = True) -> PtxProgram:
    """Parse PTX text into a :class:`PtxProgram`.

    Unsupported directives are skipped and recorded in ``program.warnings``.
    With ``strict=False`` unknown opcodes are kept with category ``Other``.
    """
    return _Parser(tokenize(source), strict).program()


def parse_file(path, strict: bool = True) -> PtxProgram:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), strict=strict)
