import pytest

from mutagrid.minilang import (ParseError, ResolutionError, TypeCheckError,
                               parse_program)
from mutagrid.minilang import ast


def test_minimal_program_with_unary_neg():
    program = parse_program("class A { fn f() -> int { return -1; } }")
    assert len(program.classes) == 1
    assert len(program.classes[0].functions) == 1
    kinds = [n.kind for n in program.nodes]
    assert kinds == [ast.RETURN, ast.UNARY_NEG, ast.LITERAL]


def test_unresolved_variable():
    with pytest.raises(ResolutionError, match="unresolved variable 'x'"):
        parse_program("class A { fn f() -> int { return x; } }")


def test_unresolved_call_target():
    with pytest.raises(ResolutionError, match="unresolved call target B.g"):
        parse_program("class A { fn f() -> int { return B.g(); } }")


def test_duplicate_class_and_function_names():
    with pytest.raises(ResolutionError, match="duplicate class"):
        parse_program("class A { } class A { }")
    with pytest.raises(ResolutionError, match="duplicate function"):
        parse_program("class A { fn f() { } fn f() { } }")


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as exc_info:
        parse_program("class A { fn f() -> int { return 1 + ; } }")
    err = exc_info.value
    assert err.offset > 0
    assert ":" in err.located("class A { fn f() -> int { return 1 + ; } }")


@pytest.mark.parametrize("body,message", [
    ("return 1 + true;", "int operands"),
    ("return true < false;", "int operands"),
    ("return 1 == true;", "same type"),
    ("return 1 && 2;", "bool operands"),
    ("let x = 1; x = true; return x;", "cannot assign"),
    ("let b = true; b += 1; return 0;", "int operands"),
    ("if (1) { } return 0;", "must be bool"),
])
def test_type_errors(body, message):
    with pytest.raises(TypeCheckError, match=message):
        parse_program("class A { fn f() -> int { %s } }" % body)


def test_missing_return_path():
    with pytest.raises(TypeCheckError, match="return on every path"):
        parse_program("class A { fn f(c: bool) -> int "
                      "{ if (c) { return 1; } } }")
    # both branches returning is fine
    parse_program("class A { fn f(c: bool) -> int "
                  "{ if (c) { return 1; } else { return 2; } } }")


def test_assert_only_in_tests():
    with pytest.raises(TypeCheckError, match="only allowed in test"):
        parse_program("class A { fn f() { assert true; } }")


def test_test_functions_take_no_params_return_void():
    with pytest.raises(TypeCheckError, match="no parameters"):
        parse_program("class A { test fn t(a: int) { } }")
    with pytest.raises(TypeCheckError, match="return void"):
        parse_program("class A { test fn t() -> int { return 1; } }")
    with pytest.raises(ResolutionError, match="cannot be called"):
        parse_program("class A { test fn t() { } fn f() { A.t(); } }")


def test_expression_statement_must_be_void_call():
    with pytest.raises(TypeCheckError, match="only void calls"):
        parse_program("class A { fn g() -> int { return 1; } "
                      "fn f() { A.g(); } }")
    with pytest.raises(TypeCheckError, match="cannot be used as a value"):
        parse_program("class A { fn h() { } "
                      "fn f() -> int { return A.h(); } }")


def test_arity_and_argument_types():
    src = "class A { fn g(a: int) -> int { return a; } fn f() -> int { %s } }"
    with pytest.raises(TypeCheckError, match="expects 1 arguments"):
        parse_program(src % "return A.g(1, 2);")
    with pytest.raises(TypeCheckError, match="must be int"):
        parse_program(src % "return A.g(true);")


def test_node_ids_dense_preorder():
    program = parse_program("""
class A
{
  fn f(a: int, b: int) -> int
  {
    let x = a + b * 2;
    if (x < 10)
    {
      x += 1;
    }
    return x;
  }
}
""")
    assert [n.node_id for n in program.nodes] == list(range(len(program.nodes)))
    for node in program.nodes:
        for child in node.children():
            assert child.node_id > node.node_id  # pre-order: parent first


def test_statement_span_excludes_semicolon():
    text = "class A { fn f() -> int { return 1 + 2; } }"
    program = parse_program(text)
    ret = program.nodes[0]
    assert program.snippet(ret) == "return 1 + 2"
    assert text[ret.start:ret.start + ret.full_length] == "return 1 + 2;"


def test_spans_lie_within_source():
    program = parse_program("class A { fn f(a: int) -> int "
                            "{ return (a + 1) * 2; } }")
    for node in program.nodes:
        assert 0 <= node.start
        assert node.start + node.length <= len(program.source_text)


def test_reparse_is_identical():
    text = """
class A
{
  fn f(a: int) -> bool
  {
    return a < 3 || a > 9;
  }

  test fn t0()
  {
    assert A.f(1);
  }
}
"""
    one = parse_program(text)
    two = parse_program(text)
    assert [n.kind for n in one.nodes] == [n.kind for n in two.nodes]
    assert [n.node_id for n in one.nodes] == [n.node_id for n in two.nodes]
    assert one.content_hash == two.content_hash


def test_comments_and_annotations():
    program = parse_program("""
class A
{
  // helper with an annotated local
  fn f(a: int) -> int
  {
    let x: int = a + 1; // trailing comment
    return x;
  }
}
""")
    assert "// helper" not in program.canonical.text
    assert "let x = a + 1;" in program.canonical.text


def test_nesting_cap():
    deep = "(" * 120 + "1" + ")" * 120
    with pytest.raises(ParseError, match="nesting too deep"):
        parse_program(f"class A {{ fn f() -> int {{ return {deep}; }} }}")


def test_integer_literal_range():
    parse_program("class A { fn f() -> int { return 9223372036854775807; } }")
    with pytest.raises(ParseError, match="out of range"):
        parse_program("class A { fn f() -> int "
                      "{ return 9223372036854775808; } }")


def test_empty_program_rejected():
    with pytest.raises(ParseError, match="empty program"):
        parse_program("   // nothing here\n")
