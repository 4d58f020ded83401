import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ald.doc_model import (
    CodeCell,
    Document,
    FilterDirective,
    Heading,
    Prose,
    serialize,
)
from ald.source_parser import parse


def test_serialize_empty_document():
    assert serialize(Document("x.md", None, ())) == ""


def test_serialize_single_heading():
    doc = Document("x.md", "T", (Heading(1, "T"),))
    assert serialize(doc) == "# T\n"


def test_appendix_a_roundtrips_textually(appendix_a_source):
    doc = parse(appendix_a_source, "factorial_peano.md")
    assert serialize(doc) == appendix_a_source


def test_appendix_b_roundtrips_textually(appendix_b_source):
    doc = parse(appendix_b_source, "assertion_checking.md")
    assert serialize(doc) == appendix_b_source


def test_serialize_reparse_is_structurally_equal(appendix_a_source, appendix_b_source):
    for source, path in ((appendix_a_source, "a.md"), (appendix_b_source, "b.md")):
        doc = parse(source, path)
        again = parse(serialize(doc), path)
        assert again == doc


def test_fence_count_matches_cell_count(appendix_a_source):
    doc = parse(appendix_a_source, "a.md")
    opened = sum(
        1
        for i, line in enumerate(appendix_a_source.split("\n"))
        if line.startswith("```")
    )
    assert opened == 2 * len(doc.code_cells())  # every fence is opened and closed


def test_exercise_requires_solution_and_checker():
    with pytest.raises(ValueError):
        CodeCell(kind="exercise", engine_id="ciao", visible_text="x")
    with pytest.raises(ValueError):
        CodeCell(kind="program", engine_id="ciao", visible_text="x", solution_text="y",
                 checker="run_tests")


def test_query_kind_matches_marker():
    CodeCell(kind="query", engine_id="ciao", visible_text="?- p.")
    with pytest.raises(ValueError):
        CodeCell(kind="query", engine_id="ciao", visible_text="p.")
    with pytest.raises(ValueError):
        CodeCell(kind="program", engine_id="ciao", visible_text="?- p.")


def test_directive_token_validation():
    with pytest.raises(ValueError):
        FilterDirective(code_file="", tool_options=(), filter_name="identity")
    with pytest.raises(ValueError):
        FilterDirective(code_file="a.pl", tool_options=("a b",), filter_name="identity")
    with pytest.raises(ValueError):
        FilterDirective(code_file="a.pl", tool_options=(), filter_name="")


def test_duplicate_cell_ids_rejected():
    cells = (
        CodeCell(kind="static", engine_id="x", visible_text="", cell_id="c1", span=(1, 2)),
        CodeCell(kind="static", engine_id="x", visible_text="", cell_id="c1", span=(3, 4)),
    )
    with pytest.raises(ValueError):
        Document("p.md", None, cells)


def test_overlapping_spans_rejected():
    blocks = (
        Prose("a", span=(1, 3)),
        Prose("b", span=(2, 4)),
    )
    with pytest.raises(ValueError):
        Document("p.md", None, blocks)


# --- property: serialize/parse round trip over generated documents ----------

_prose_line = st.text(
    alphabet=st.characters(
        codec="ascii", exclude_characters="\r\n`#@\\", exclude_categories=("Cc",)
    ),
    min_size=0,
    max_size=24,
).filter(lambda s: not s.startswith("solution=") and s == s.rstrip())

_code_line = _prose_line.filter(lambda s: s.strip() != "```" and not s.startswith("```"))

_tag = st.sampled_from(["ciao", "ciao_runnable", "lp", "lp_runnable"])


@st.composite
def _documents(draw):
    parts = []
    n_blocks = draw(st.integers(min_value=0, max_value=5))
    for _ in range(n_blocks):
        kind = draw(st.sampled_from(["prose", "heading", "cell", "directive"]))
        if kind == "prose":
            lines = draw(st.lists(_prose_line, min_size=1, max_size=3))
            parts.append("\n".join(lines) + "\n")
        elif kind == "heading":
            level = draw(st.integers(min_value=1, max_value=6))
            text = draw(_prose_line.filter(lambda s: s == s.strip() and s))
            parts.append("#" * level + " " + text + "\n")
        elif kind == "cell":
            tag = draw(_tag)
            body = draw(st.lists(_code_line, min_size=0, max_size=4))
            exercise = tag.endswith("_runnable") and draw(st.booleans())
            parts.append("```" + tag + "\n")
            if exercise:
                skel = [line for line in body if line.strip()]
                parts.extend(line + "\n" for line in skel)
                parts.append("solution=verify_assert\n")
                parts.append("solved.\n")
            else:
                parts.extend(line + "\n" for line in body)
            parts.append("```\n")
        else:
            parts.append("@exfilter{app.pl}{V,filter=warn_error}\n")
    return "".join(parts)


@settings(max_examples=150, deadline=None)
@given(_documents())
def test_roundtrip_property(source):
    doc = parse(source, "gen.md")
    text = serialize(doc)
    again = parse(text, "gen.md")
    assert again == doc
    assert serialize(again) == text
