from gpe.ptx.ast import (
    CATEGORY_ORDER,
    Address,
    Guard,
    Immediate,
    Instruction,
    KernelDef,
    Label,
    OpCategory,
    Param,
    PtxProgram,
    Register,
    SpecialRegister,
    Vector,
    program_to_json,
)
from gpe.ptx.lexer import Token, tokenize
from gpe.ptx.opcodes import SUPPORTED_OPCODES, classify, opcode_table
from gpe.ptx.parser import parse, parse_file
from gpe.ptx.printer import format_program

__all__ = [
    "CATEGORY_ORDER", "Address", "Guard", "Immediate", "Instruction", "KernelDef", "Label",
    "OpCategory", "Param", "PtxProgram", "Register", "SpecialRegister", "Token", "Vector",
    "SUPPORTED_OPCODES", "classify", "format_program", "opcode_table", "parse", "parse_file",
    "program_to_json", "tokenize",
]
