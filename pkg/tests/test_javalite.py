from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from updatebench.errors import LexError, ParseError, UnterminatedComment
from updatebench.javalite import (
    TokenKind,
    extract_methods,
    lex,
    strip_comments,
)

FIXTURES = Path(__file__).parent / "fixtures"


# ---------------------------------------------------------------------------
# strip_comments


def test_line_comment_removed():
    assert strip_comments("int a; // x") == "int a;  "


def test_string_literal_protected():
    src = 'String s = "/*not a comment*/";'
    assert strip_comments(src) == src


def test_char_literal_protected():
    src = "char c = '/'; int x = 1 / 2;"
    assert strip_comments(src) == src


def test_block_comment_single_space():
    assert strip_comments("a /* gone */ b") == "a   b"


def test_unterminated_block_comment_offset():
    with pytest.raises(UnterminatedComment) as e:
        strip_comments("int a; /* oops")
    assert e.value.offset == 7


def test_hand_stripped_fixture_matches():
    src = (FIXTURES / "billing_service.java").read_text()
    expected = (FIXTURES / "billing_service.stripped.java").read_text()
    got = strip_comments(src)
    assert got == expected
    # and the stripped file re-lexes identically to the hand-stripped one
    assert lex(got) == lex(expected)


def test_strip_comments_idempotent_on_fixture():
    src = (FIXTURES / "billing_service.java").read_text()
    once = strip_comments(src)
    assert strip_comments(once) == once


@given(st.text(alphabet="ab/*\" \n;'x\\", max_size=60))
@settings(max_examples=300)
def test_strip_comments_idempotent_fuzz(s):
    try:
        once = strip_comments(s)
    except UnterminatedComment:
        return
    assert strip_comments(once) == once


# ---------------------------------------------------------------------------
# lex


def test_lex_maximal_munch():
    kinds = [(t.kind, t.text) for t in lex("a+=1;")]
    assert kinds == [
        (TokenKind.IDENTIFIER, "a"),
        (TokenKind.OPERATOR, "+="),
        (TokenKind.INT_LITERAL, "1"),
        (TokenKind.PUNCTUATION, ";"),
    ]


def test_lex_keyword_vs_identifier():
    kinds = [(t.kind, t.text) for t in lex("return sDefaultContactImage;")]
    assert kinds == [
        (TokenKind.KEYWORD, "return"),
        (TokenKind.IDENTIFIER, "sDefaultContactImage"),
        (TokenKind.PUNCTUATION, ";"),
    ]


def test_lex_literals_and_operators():
    toks = lex('x >>>= 0x1F; float f = 1.5e-3f; s = "a\\"b"; c = \'\\n\'; m(a, b...);')
    texts = [t.text for t in toks]
    assert ">>>=" in texts and "0x1F" in texts and "1.5e-3f" in texts
    assert '"a\\"b"' in texts and "'\\n'" in texts and "..." in texts
    by_text = {t.text: t.kind for t in toks}
    assert by_text["0x1F"] is TokenKind.INT_LITERAL
    assert by_text["1.5e-3f"] is TokenKind.FLOAT_LITERAL
    assert by_text['"a\\"b"'] is TokenKind.STRING_LITERAL
    assert by_text["'\\n'"] is TokenKind.CHAR_LITERAL
    assert by_text["..."] is TokenKind.PUNCTUATION


def test_lex_annotation():
    toks = lex("@Override public void f()")
    assert toks[0].kind is TokenKind.ANNOTATION and toks[0].text == "@Override"


def test_lex_error_offset():
    with pytest.raises(LexError) as e:
        lex("int a = #;")
    assert e.value.offset == 8


def test_lex_offsets():
    toks = lex("ab  cd")
    assert [(t.text, t.byte_offset) for t in toks] == [("ab", 0), ("cd", 4)]


_ident = st.from_regex(r"[A-Za-z_$][A-Za-z0-9_$]{0,8}", fullmatch=True)
_token_text = st.one_of(
    _ident,
    st.sampled_from(["+", "-", "*", "==", "&&", "{", "}", "(", ")", ";", ",", ".", "=",
                     "return", "if", "int", "42", "0x1F", "1.5f", '"str"', "'c'"]),
)


@given(st.lists(_token_text, max_size=30))
@settings(max_examples=300)
def test_lex_join_relex_roundtrip(texts):
    joined = " ".join(texts)
    toks = lex(joined)
    rejoined = " ".join(t.text for t in toks)
    assert [(t.kind, t.text) for t in lex(rejoined)] == [(t.kind, t.text) for t in toks]


# ---------------------------------------------------------------------------
# extract_methods


def test_extract_code1_shape():
    src = strip_comments(
        """
        class Contact {
            private Drawable getDefaultContactImage() {
                if (sDefaultContactImage == null)
                    sDefaultContactImage = context.getResources()
                        .getDrawable(R.drawable.ic_contact_picture);
                return sDefaultContactImage;
            }
        }
        """
    )
    spans = extract_methods(src)
    assert len(spans) == 1
    assert spans[0].name == "getDefaultContactImage"
    assert spans[0].param_count == 0


def test_extract_empty_class():
    assert extract_methods("class A {}") == []


def test_extract_unbalanced_braces():
    with pytest.raises(ParseError):
        extract_methods("class A { void f() { }")


def test_extract_five_method_fixture_hand_annotated():
    src = (FIXTURES / "media_cache.java").read_text()
    spans = extract_methods(src)
    # Hand-annotated: five methods, in body_start order. The anonymous
    # Runnable's run() and the evictAll lambda body are not extracted.
    assert [(s.name, s.param_count) for s in spans] == [
        ("MediaCache", 1),
        ("describe", 2),
        ("touch", 1),
        ("evictAll", 0),
    ]
    # body offsets: anchor on unique substrings of the fixture
    by_name = {s.name: s for s in spans}
    ctor = by_name["MediaCache"]
    assert src[ctor.body_start] == "{"
    assert ctor.body_start == src.index("{", src.index("MediaCache(int capacity)"))
    assert src[ctor.body_start : ctor.body_end].endswith("this.hits = capacity;\n    }")
    touch = by_name["touch"]
    assert "return now + 1;" in src[touch.body_start : touch.body_end]
    assert touch.signature_text.startswith("long touch")
    assert "throws IllegalStateException" in touch.signature_text
    describe = by_name["describe"]
    assert describe.signature_text.startswith("@Override")
    # nested anonymous class stays inside describe's body
    assert "public void run()" in src[describe.body_start : describe.body_end]


def test_extract_five_methods_count():
    # the fixture holds 4 named methods plus one added here via inner class
    src = (FIXTURES / "media_cache.java").read_text()
    src = src.replace(
        "protected void evictAll() {",
        "int size() { return hits; }\n    protected void evictAll() {",
    )
    spans = extract_methods(src)
    assert len(spans) == 5
    assert [s.name for s in spans] == ["MediaCache", "describe", "touch", "size", "evictAll"]


def test_spans_sorted_and_nesting_only_overlap():
    src = (FIXTURES / "media_cache.java").read_text()
    spans = extract_methods(src)
    starts = [s.body_start for s in spans]
    assert starts == sorted(starts)
    for a in spans:
        assert a.body_start < a.body_end
        body = src[a.body_start : a.body_end]
        assert body.count("{") == body.count("}")
        for b in spans:
            if a is b:
                continue
            nested = (a.body_start <= b.body_start and b.body_end <= a.body_end) or (
                b.body_start <= a.body_start and a.body_end <= b.body_end
            )
            disjoint = a.body_end <= b.body_start or b.body_end <= a.body_start
            assert nested or disjoint


def test_span_invariants_on_fixture():
    src = (FIXTURES / "media_cache.java").read_text()
    for s in extract_methods(src):
        toks = lex(src[s.body_start : s.body_end])
        assert toks[0].text == "{" and toks[-1].text == "}"
        first_sig = lex(s.signature_text)[0]
        assert first_sig.kind in (TokenKind.KEYWORD, TokenKind.IDENTIFIER, TokenKind.ANNOTATION)


def test_local_named_class_methods_extracted():
    src = strip_comments(
        """
        class Outer {
            void host() {
                class Local {
                    int inner() { return 1; }
                }
                new Local().inner();
            }
        }
        """
    )
    names = [s.name for s in extract_methods(src)]
    assert names == ["host", "inner"]


def test_enum_constant_bodies_skipped():
    src = """
    enum Op {
        PLUS("+") { },
        MINUS("-");
        private final String sym;
        Op(String sym) { this.sym = sym; }
        String sym() { return sym; }
    }
    """
    names = [s.name for s in extract_methods(src)]
    assert names == ["Op", "sym"]


def test_interface_abstract_methods_have_no_span():
    src = "interface I { void a(); default int b() { return 2; } }"
    spans = extract_methods(src)
    assert [s.name for s in spans] == ["b"]
