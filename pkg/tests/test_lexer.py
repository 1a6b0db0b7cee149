import pytest
from hypothesis import given, strategies as st

from gpe.errors import LexError
from gpe.ptx import tokenize


def kinds(src):
    return [repr(t) for t in tokenize(src)]


def test_simple_instruction():
    assert kinds("add.s32 %r1, %r2, 4;") == [
        "Ident(add.s32)", "Reg(%r1)", "Comma(,)", "Reg(%r2)", "Comma(,)", "Int(4)", "Semi(;)"]


def test_empty_source():
    assert tokenize("") == []


def test_address_tokens():
    toks = tokenize("ld.global.f32 %f1, [%rd1+8];")
    texts = [t.text for t in toks]
    assert "[" in texts and "]" in texts
    i = texts.index("+")
    assert toks[i + 1].kind == "Int" and toks[i + 1].value == 8


def test_comments_stripped_and_positions_kept():
    toks = tokenize("// header\n/* block\ncomment */ mov.u32 %r1, 0; // tail")
    assert toks[0].text == "mov.u32"
    assert (toks[0].line, toks[0].column) == (3, 12)


def test_float_literals():
    toks = tokenize("0f3F800000 1.5 0d3FF0000000000000")
    assert [t.kind for t in toks] == ["Float", "Float", "Float"]
    assert toks[0].value == 1.0 and toks[1].value == 1.5 and toks[2].value == 1.0


def test_illegal_character_reports_position():
    with pytest.raises(LexError) as info:
        tokenize("mov.u32 %r1, 0;\n  add # 1;")
    assert info.value.line == 2 and info.value.column == 7


def test_unterminated_block_comment():
    with pytest.raises(LexError):
        tokenize("/* never closed")


@given(st.lists(st.sampled_from(["add.s32", "%r1", ",", "4", ";", "[", "]", "+", "@%p1", "\n"]),
                max_size=30))
def test_tokens_carry_valid_positions(parts):
    src = " ".join(parts)
    lines = src.split("\n")
    for tok in tokenize(src):
        assert 1 <= tok.line <= len(lines)
        assert lines[tok.line - 1][tok.column - 1:].startswith(tok.text)
