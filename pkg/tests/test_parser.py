import re

import pytest

from gpe.corpus import corpus_files
from gpe.errors import ParseError, UndeclaredRegister, UnknownOpcode, UnresolvedLabel
from gpe.ptx import (
    SUPPORTED_OPCODES,
    Address,
    Immediate,
    OpCategory,
    Param,
    SpecialRegister,
    Vector,
    classify,
    format_program,
    opcode_table,
    parse,
    program_to_json,
)

HEAD = ".version 7.0\n.target sm_70\n"


def kernel_of(body, params="", regs=".reg .b32 %r<4>;\n.reg .pred %p<2>;\n"):
    return parse(f"{HEAD}.visible .entry k({params})\n{{\n{regs}{body}\n}}\n").kernels[0]


def test_minimal_kernel():
    prog = parse(HEAD + ".visible .entry k(){ ret; }")
    assert len(prog.kernels) == 1
    k = prog.kernels[0]
    assert [i.opcode for i in k.body] == ["ret"]
    assert k.labels == {}
    assert prog.version == "7.0" and prog.target == "sm_70"


def test_missing_label():
    with pytest.raises(UnresolvedLabel) as info:
        kernel_of("bra DONE;\nret;")
    assert info.value.label == "DONE"


def test_three_instruction_categories():
    k = kernel_of("mov.u32 %r1, 0;\nadd.s32 %r2, %r1, 3;\nret;")
    assert len(k.body) == 3
    assert [i.category for i in k.body] == [OpCategory.Move, OpCategory.IntArith, OpCategory.Return]


def test_operand_variants():
    k = kernel_of(
        "ld.param.u64 %rd1, [buf];\nmov.u32 %r1, %tid.x;\nld.global.v4.f32 {%f1, %f2, %f3, %f4}, [%rd1+16];\n"
        "st.shared.f32 [%rd1+-4], %f1;\nmov.f32 %f1, 0f3F800000;\nret;",
        params=".param .u64 buf",
        regs=".reg .b32 %r<2>;\n.reg .f32 %f<5>;\n.reg .b64 %rd<2>;\n")
    ld, mov, vec, st, movf, _ = k.body
    assert ld.srcs[0] == Address(Param("buf"), 0, "param")
    assert mov.srcs[0] == SpecialRegister("%tid.x")
    assert isinstance(vec.dst, Vector) and len(vec.dst.items) == 4
    assert vec.srcs[0].offset == 16 and vec.srcs[0].space == "global"
    assert vec.category is OpCategory.Load and "v4" in vec.modifiers
    assert st.dst.space == "shared" and st.dst.offset == -4
    assert movf.srcs[0] == Immediate("0f3F800000", 1.0)


def test_immediate_keeps_literal_text():
    k = kernel_of("add.s32 %r1, %r2, 0x10;\nret;")
    imm = k.body[0].srcs[1]
    assert imm.text == "0x10" and imm.value == 16


def test_guards_and_labels():
    k = kernel_of("setp.lt.s32 %p1, %r1, 3;\n@!%p1 bra END;\nadd.s32 %r1, %r1, 1;\nEND:\nret;")
    br = k.body[1]
    assert br.guard.register == "%p1" and br.guard.negated
    assert br.label == "END" and k.labels["END"] == 3


def test_undeclared_register():
    with pytest.raises(UndeclaredRegister):
        kernel_of("add.s32 %q1, %r1, 1;\nret;")


def test_branch_needs_one_label():
    with pytest.raises(ParseError):
        kernel_of("L:\nbra L, L;\nret;")


def test_malformed_instruction_reports_line():
    with pytest.raises(ParseError) as info:
        parse(HEAD + ".visible .entry k()\n{\n.reg .b32 %r<2>;\nadd.s32 %r1 %r0, 1;\nret;\n}\n")
    assert info.value.line == 6


def test_duplicate_kernel_names():
    with pytest.raises(ParseError):
        parse(HEAD + ".visible .entry k(){ ret; }\n.visible .entry k(){ ret; }")


def test_unknown_opcode_strict_and_lenient(error_ptx):
    src = error_ptx("unknown_opcode.ptx")
    with pytest.raises(UnknownOpcode):
        parse(src)
    k = parse(src, strict=False).kernels[0]
    assert k.body[0].category is OpCategory.Other


def test_unsupported_directive_warns():
    prog = parse(HEAD + ".file 1 \"x.cu\"\n.visible .entry k(){ ret; }")
    assert prog.warnings and "file" in prog.warnings[0]
    assert len(prog.kernels[0].body) == 1


def test_multi_kernel_selection():
    prog = parse((corpus_files()[0].parent / "multi_kernel.ptx").read_text())
    assert {k.name for k in prog.kernels} == {"fill", "scale"}
    assert prog.kernel("scale").name == "scale"


@pytest.mark.parametrize("opcode,mods,cat", [
    ("add", ("s32",), OpCategory.IntArith),
    ("mul", ("f32",), OpCategory.FloatArith),
    ("sqrt", ("approx", "f32"), OpCategory.SpecialFunc),
    ("ld", ("global", "f32"), OpCategory.Load),
    ("setp", ("lt", "s32"), OpCategory.SetPred),
    ("bar", ("sync",), OpCategory.Sync),
    ("selp", ("b32",), OpCategory.Compare),
    ("exit", (), OpCategory.Return),
])
def test_classify(opcode, mods, cat):
    assert classify(opcode, mods) is cat


def test_classify_unknown():
    with pytest.raises(UnknownOpcode) as info:
        classify("frobnicate", ())
    assert "frobnicate" in str(info.value)
    assert classify("frobnicate", (), strict=False) is OpCategory.Other


def test_classification_is_total():
    for opcode, mods in opcode_table():
        classify(opcode, mods)
    assert {op for op, _ in opcode_table()} == set(SUPPORTED_OPCODES)


def _instruction_semicolons(text):
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)
    count = 0
    for line in text.splitlines():
        line = line.split("//")[0].strip()
        # directives (.reg, .shared, ...) also end in ';' but are not instructions
        for stmt in line.split(";")[:-1]:
            stmt = stmt.strip().lstrip("{").strip()
            if stmt.endswith(":"):
                continue
            stmt = re.sub(r"^[$\w]+:\s*", "", stmt)
            if stmt and not stmt.startswith("."):
                count += 1
    return count


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.stem)
def test_count_preservation(path):
    text = path.read_text()
    prog = parse(text)
    assert sum(len(k.body) for k in prog.kernels) == _instruction_semicolons(text)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.stem)
def test_round_trip(path):
    prog = parse(path.read_text())
    again = parse(format_program(prog))
    assert again == prog


def test_json_dump_is_stable():
    prog = parse(HEAD + ".visible .entry k(){ ret; }")
    data = program_to_json(prog)
    assert data["kernels"][0]["name"] == "k"
    assert data["kernels"][0]["body"][0]["category"] == "Return"
