from mutagrid.minilang import parse_program
from mutagrid.minilang.printer import expr_to_text

SOURCE = """class Demo
{
  fn f(a: int, b: int) -> int
  {
    let x = (a + b) * 2;
    if (x < 10)
    {
      x += 1;
    }
    else if (x > 90)
    {
      x -= 1;
    }
    else
    {
      x = 0;
    }
    while (x < 40)
    {
      x += a;
    }
    return -x;
  }

  fn g(a: int) -> bool
  {
    return !(a < 3) && a != 9;
  }

  test fn t0()
  {
    assert Demo.f(1, 2) == 40;
  }
}
"""


def test_canonical_form_is_a_fixpoint():
    program = parse_program(SOURCE)
    assert program.canonical.text == SOURCE
    again = parse_program(program.canonical.text)
    assert again.canonical.text == SOURCE
    assert [n.kind for n in again.nodes] == [n.kind for n in program.nodes]


def test_messy_input_canonicalizes_to_same_program():
    messy = ("class Demo { fn f(a:int,b:int)->int { let x=(a+b)*2;\n"
             "if(x<10){x+=1;} else { if (x>90) { x-=1; } else { x=0; } }\n"
             "while(x<40){x+=a;} return -x; }\n"
             "fn g(a:int)->bool { return !(a<3)&&a!=9; }\n"
             "test fn t0(){assert Demo.f(1,2)==40;} }")
    program = parse_program(messy)
    assert program.canonical.text == SOURCE
    assert program.content_hash == parse_program(SOURCE).content_hash


def test_node_line_map_points_at_statement_lines():
    program = parse_program(SOURCE)
    canonical = program.canonical
    lines = canonical.text.split("\n")
    for node in program.nodes:
        line = canonical.node_line[node.node_id]
        assert 1 <= line <= len(lines)
    # the if condition lives on the `if (...)` header line
    if_nodes = [n for n in program.nodes if n.kind == "if"]
    header = lines[canonical.node_line[if_nodes[0].node_id] - 1]
    assert header.strip().startswith("if (")
    cond_line = canonical.node_line[if_nodes[0].cond.node_id]
    assert cond_line == canonical.node_line[if_nodes[0].node_id]


def test_class_and_function_line_ranges():
    program = parse_program(SOURCE)
    first, last = program.canonical.class_lines["Demo"]
    lines = program.canonical.text.split("\n")
    assert lines[first - 1] == "class Demo"
    assert lines[last - 1] == "}"
    f_first, f_last = program.canonical.function_lines["Demo.f"]
    assert lines[f_first - 1].lstrip().startswith("fn f(")
    assert f_first < f_last <= last


def test_expr_printing_parenthesization():
    program = parse_program(
        "class A { fn f(a: int, b: int) -> int "
        "{ return (a + b) * (a - b) + -(a * 2); } }")
    ret = program.nodes[0]
    assert expr_to_text(ret.value) == "(a + b) * (a - b) + -(a * 2)"
    # reparsing the printed text preserves structure
    rebuilt = parse_program(program.canonical.text)
    assert rebuilt.canonical.text == program.canonical.text
