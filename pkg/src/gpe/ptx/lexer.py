"""PTX tokenizer."""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from typing import Union

from gpe.errors import LexError


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    value: Union[int, float, None] = None

    def __repr__(self):
        return f"{self.kind}({self.text})"


PUNCT = {
    ",": "Comma", ";": "Semi", "[": "LBrack", "]": "RBrack", "{": "LBrace", "}": "RBrace",
    "(": "LParen", ")": "RParen", "+": "Plus", "-": "Minus", "@": "At", "!": "Bang",
    ":": "Colon", "<": "Lt", ">": "Gt", "|": "Pipe", "=": "Eq",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<string>"[^"\n]*")
  | (?P<hexf32>0[fF][0-9a-fA-F]{8})
  | (?P<hexf64>0[dD][0-9a-fA-F]{16})
  | (?P<hexint>0[xX][0-9a-fA-F]+[uU]?)
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+[uU]?)
  | (?P<reg>%[A-Za-z_$][A-Za-z0-9_$]*(?:\.[xyz](?![A-Za-z0-9_]))?)
  | (?P<directive>\.[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z0-9_$]+)*)
  | (?P<punct>[,;\[\]{}()+\-@!:<>|=])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(source: str) -> list:
    """Split PTX text into tokens, dropping whitespace and comments."""
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source.startswith("/*", pos):
                raise LexError("unterminated block comment", line, pos - line_start + 1)
            raise LexError(f"illegal character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "block_comment":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rindex("\n") + 1
        elif kind in ("ws", "line_comment"):
            pass
        elif kind == "hexf32":
            value = struct.unpack(">f", bytes.fromhex(text[2:]))[0]
            tokens.append(Token("Float", text, line, col, value))
        elif kind == "hexf64":
            value = struct.unpack(">d", bytes.fromhex(text[2:]))[0]
            tokens.append(Token("Float", text, line, col, value))
        elif kind == "hexint":
            tokens.append(Token("Int", text, line, col, int(text.rstrip("uU"), 16)))
        elif kind == "float":
            tokens.append(Token("Float", text, line, col, float(text)))
        elif kind == "int":
            tokens.append(Token("Int", text, line, col, int(text.rstrip("uU"))))
        elif kind == "reg":
            tokens.append(Token("Reg", text, line, col))
        elif kind == "directive":
            tokens.append(Token("Directive", text, line, col))
        elif kind == "ident":
            tokens.append(Token("Ident", text, line, col))
        elif kind == "string":
            tokens.append(Token("String", text, line, col))
        else:
            tokens.append(Token(PUNCT[text], text, line, col))
        pos = m.end()
    return tokens
