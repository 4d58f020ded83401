import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ald.doc_model import CodeCell, Document, FilterDirective, Heading, Prose
from ald.source_parser import (
    BAD_DIRECTIVE,
    BAD_SOLUTION_MARKER,
    UNCLOSED_FENCE,
    ParseError,
    classify_cell,
    parse,
)


def cell_kinds(doc):
    return [c.kind for c in doc.code_cells()]


def test_appendix_a_cells(appendix_a_source):
    doc = parse(appendix_a_source, "factorial_peano.md")
    assert cell_kinds(doc) == ["program", "query", "query", "static", "program"]
    assert doc.title == "Exercise: factorial using ISO-Prolog arithmetic"
    assert all(c.engine_id == "ciao" for c in doc.code_cells())
    ids = [c.cell_id for c in doc.code_cells()]
    assert ids == [f"factorial_peano-cell-{i}" for i in range(1, 6)]
    assert not doc.directives()


def test_appendix_b_structure(appendix_b_source):
    doc = parse(appendix_b_source, "assertion_checking.md")
    interesting = [
        b for b in doc.blocks if isinstance(b, (CodeCell, FilterDirective))
    ]
    shapes = [
        b.kind if isinstance(b, CodeCell) else "directive" for b in interesting
    ]
    assert shapes == ["static", "directive", "exercise"]

    directive = doc.directives()[0]
    assert directive.code_file == "app_assrt_false.pl"
    assert directive.tool_options == ("V",)
    assert directive.filter_name == "warn_error"
    assert directive.tool_id is None

    exercise = doc.code_cells()[-1]
    assert exercise.checker == "verify_assert"
    assert "=> var(C)" in exercise.visible_text
    assert "=> list(C)" in exercise.solution_text
    assert "=> list(C)" not in exercise.visible_text


def test_empty_source():
    doc = parse("", "empty.md")
    assert doc == Document("empty.md", None, ())


def test_line_spans_are_recorded(appendix_b_source):
    doc = parse(appendix_b_source, "b.md")
    spans = [b.span for b in doc.blocks]
    assert spans == sorted(spans)
    heading = doc.blocks[0]
    assert isinstance(heading, Heading) and heading.span == (1, 1)
    directive = doc.directives()[0]
    line = appendix_b_source.split("\n").index(
        "@exfilter{app_assrt_false.pl}{V,filter=warn_error}"
    ) + 1
    assert directive.span == (line, line)


def test_unclosed_fence_reports_opening_line():
    src = "text\n```ciao\np.\n"
    with pytest.raises(ParseError) as err:
        parse(src, "x.md")
    assert err.value.kind == UNCLOSED_FENCE
    assert err.value.line == 2


def test_bad_directive():
    for src in (
        "@exfilter{a.pl}\n",
        "@exfilter{}{filter=x}\n",
        "@exfilter{a.pl}{}\n",
        "@exfilter{a.pl}{V}\n",
        "@exfilter{a.pl}{filter=a,filter=b}\n",
        "@exfilter{a.pl}{fil ter=a}\n",
    ):
        with pytest.raises(ParseError) as err:
            parse(src, "x.md")
        assert err.value.kind == BAD_DIRECTIVE
        assert err.value.line == 1


def test_directive_token_routing():
    doc = parse("@exfilter{a.pl}{V,-w,filter=regex,regex:^WARN,tool=engine}\n", "x.md")
    d = doc.directives()[0]
    assert d.tool_options == ("V", "-w")
    assert d.filter_name == "regex"
    assert d.filter_params == ("^WARN",)
    assert d.tool_id == "engine"


def test_marker_outside_runnable_fence():
    with pytest.raises(ParseError) as err:
        parse("solution=verify_assert\n", "x.md")
    assert err.value.kind == BAD_SOLUTION_MARKER

    with pytest.raises(ParseError) as err:
        parse("```ciao\nsolution=verify_assert\n```\n", "x.md")
    assert err.value.kind == BAD_SOLUTION_MARKER
    assert err.value.line == 2


def test_marker_twice_in_one_fence():
    src = "```c_runnable\na.\nsolution=x\nb.\nsolution=y\n```\n"
    with pytest.raises(ParseError) as err:
        parse(src, "x.md")
    assert err.value.kind == BAD_SOLUTION_MARKER
    assert err.value.line == 5


def test_classify_query_cell():
    cell = classify_cell("ciao_runnable", "?- factorial(X, s(0)).")
    assert cell.kind == "query"
    assert cell.engine_id == "ciao"


def test_classify_static_cell():
    cell = classify_cell("ciao", "?- looks like a query but is static.")
    assert cell.kind == "static"


def test_classify_exercise_cell():
    cell = classify_cell("ciao_runnable", "skel.\nsolution=verify_assert\nsol.")
    assert cell.kind == "exercise"
    assert cell.checker == "verify_assert"
    assert cell.visible_text == "skel."
    assert cell.solution_text == "sol."


def test_classify_trims_blank_edges_around_marker():
    body = "\nskel.\n\nsolution=run_tests\n\nsol.\n\n"
    cell = classify_cell("x_runnable", body)
    assert cell.visible_text == "skel."
    assert cell.solution_text == "sol."


def test_escaped_underscore_tag_is_normalized():
    cell = classify_cell("ciao\\_runnable", "p.")
    assert cell.kind == "program"
    assert cell.engine_id == "ciao"


def test_title_line_is_kept_in_prose(appendix_a_source):
    doc = parse(appendix_a_source, "a.md")
    first = doc.blocks[0]
    assert isinstance(first, Prose)
    assert first.text.startswith("\\title ")


def test_title_falls_back_to_first_h1():
    doc = parse("# My Page\n\nbody\n", "p.md")
    assert doc.title == "My Page"


# --- fuzzing ---------------------------------------------------------------

_fragments = st.sampled_from(
    [
        "```ciao_runnable",
        "```ciao",
        "```",
        "``` ",
        "@exfilter{a.pl}{V,filter=warn_error}",
        "@exfilter{}{}",
        "@exfilter{x}{y",
        "solution=verify_assert",
        "solution=",
        "# heading",
        "####### too deep",
        "\\title something",
        "?- query.",
        "plain text",
        "  indented",
        "",
    ]
)

_random_line = st.text(
    alphabet=st.characters(codec="ascii", exclude_characters="\r", exclude_categories=("Cc",)),
    max_size=30,
)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.one_of(_fragments, _random_line), max_size=12))
def test_parse_is_total_and_never_builds_invalid_documents(lines):
    source = "\n".join(lines)
    try:
        doc = parse(source, "fuzz.md")
    except ParseError as err:
        assert 1 <= err.line <= max(1, len(source.split("\n")))
        return
    # Document invariants are enforced by the model's validators; check
    # the fence/cell conservation law on top.
    closed_fences = 0
    in_fence = False
    for line in source.split("\n"):
        if not in_fence and line.rstrip().startswith("```"):
            in_fence = True
        elif in_fence and line.rstrip() == "```":
            in_fence = False
            closed_fences += 1
    assert len(doc.code_cells()) == closed_fences
