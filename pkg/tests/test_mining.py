import random
from datetime import datetime, timezone

import pytest
from gitrepo import GitRepoBuilder

from updatebench.javalite import extract_methods, strip_comments
from updatebench.mining import (
    FilterPolicy,
    MethodPairTriplet,
    changed_token_count,
    dedupe,
    filter_small,
    method_tokens,
    mine_repo,
    mine_repos,
    pair_methods,
)
from updatebench.errors import RepoError, UpdateBenchError


def _spans(src: str):
    stripped = strip_comments(src)
    return [(s, method_tokens(stripped, s)) for s in extract_methods(stripped)]


def make_triplet(prior, updated, when="2018-01-01T00:00:00+00:00", repo="r", commit="c", path="A.java", message="m"):
    return MethodPairTriplet(
        repo_id=repo,
        commit_hash=commit,
        commit_time=datetime.fromisoformat(when),
        message=message,
        prior=tuple(prior),
        updated=tuple(updated),
        file_path=path,
    )


# ---------------------------------------------------------------------------
# pair_methods


def test_identical_files_pair_nothing():
    src = "class A { void f() { int x = 1; } }"
    assert pair_methods(_spans(src), _spans(src)) == []


def test_single_body_edit_pairs_once():
    before = "class A { void f() { int x = 1; } }"
    after = "class A { void f() { int x = 2; } }"
    pairs = pair_methods(_spans(before), _spans(after))
    assert len(pairs) == 1
    assert pairs[0].name == "f"
    assert "1" in pairs[0].prior and "2" in pairs[0].updated


def test_overload_pairing_by_arity():
    before = """
    class A {
        void d(int a) { run(a); }
        void d(int a, int b) { run(a); }
    }
    """
    after = """
    class A {
        void d(int a) { run(a); }
        void d(int a, int b) { run(b); }
    }
    """
    pairs = pair_methods(_spans(before), _spans(after))
    # manifest: only the 2-arg overload changed
    assert [(p.name, len(p.prior)) for p in pairs] == [("d", len(_spans(before)[1][1]))]
    assert "b" in pairs[0].updated


def test_added_and_deleted_methods_dropped():
    before = "class A { void gone() { a(); } void kept() { b(); } }"
    after = "class A { void kept() { b(); c(); } void fresh() { d(); } }"
    pairs = pair_methods(_spans(before), _spans(after))
    assert [p.name for p in pairs] == ["kept"]


def test_duplicate_name_arity_dropped():
    before = "class A { void f(int x) { a(); } void f(int y) { b(); } }"
    after = "class A { void f(int x) { c(); } }"
    assert pair_methods(_spans(before), _spans(after)) == []


# ---------------------------------------------------------------------------
# changed_token_count


def test_changed_tokens_identical():
    assert changed_token_count(["a", "b"], ["a", "b"]) == 0


def test_changed_tokens_substitution():
    assert changed_token_count(["a", "b", "c"], ["a", "x", "c"]) == 1


from oracles import levenshtein_oracle as _levenshtein_oracle


def test_changed_tokens_vs_dp_oracle():
    rng = random.Random(7)
    vocab = ["a", "b", "c", "x", "y", "(", ")", ";"]
    for _ in range(60):
        a = [rng.choice(vocab) for _ in range(rng.randint(0, 30))]
        b = list(a)
        for _ in range(rng.randint(0, 10)):
            op = rng.choice(["ins", "del", "sub"])
            if op == "ins" or not b:
                b.insert(rng.randint(0, len(b)), rng.choice(vocab))
            elif op == "del":
                b.pop(rng.randrange(len(b)))
            else:
                b[rng.randrange(len(b))] = rng.choice(vocab)
        assert changed_token_count(a, b) == _levenshtein_oracle(a, b)


# ---------------------------------------------------------------------------
# filter_small


def _toks(n):
    return ["t%d" % i for i in range(n)]


def test_filter_boundary_inside():
    prior = _toks(49)
    updated = prior[:-4] + ["x1", "x2", "x3", "x4"]
    t = make_triplet(prior, updated)
    assert filter_small([t], FilterPolicy()) == [t]


def test_filter_boundary_outside():
    prior = _toks(50)
    updated = prior[:-1] + ["x"]
    t = make_triplet(prior, updated)
    assert filter_small([t], FilterPolicy()) == []


def test_filter_changed_tokens_cap():
    prior = _toks(20)
    updated = prior[:-5] + ["x"] * 5
    t = make_triplet(prior, updated)
    assert filter_small([t], FilterPolicy()) == []


def test_filter_disabled_passthrough():
    t = make_triplet(_toks(80), _toks(80)[:-1] + ["x"])
    assert filter_small([t], FilterPolicy(enabled=False)) == [t]


def test_filter_matches_recheck_oracle():
    rng = random.Random(3)
    batch = []
    for i in range(100):
        n = rng.randint(5, 70)
        prior = _toks(n)
        updated = list(prior)
        for _ in range(rng.randint(1, 8)):
            updated[rng.randrange(len(updated))] = "z%d" % rng.randint(0, 9)
        if tuple(updated) == tuple(prior):
            updated[0] = "zz"
        batch.append(make_triplet(prior, updated, commit="c%d" % i))
    policy = FilterPolicy()
    kept = filter_small(batch, policy)
    oracle = [
        t
        for t in batch
        if len(t.prior) < 50
        and len(t.updated) < 50
        and _levenshtein_oracle(list(t.prior), list(t.updated)) < 5
    ]
    assert kept == oracle


def test_filter_dedupe_commute():
    rng = random.Random(5)
    batch = []
    for i in range(200):
        prior = _toks(rng.randint(3, 60))
        updated = list(prior)
        updated[-1] = "q%d" % rng.randint(0, 3)
        if tuple(updated) == tuple(prior):
            updated[-1] = "qq"
        batch.append(make_triplet(prior, updated, when="20%02d-01-01T00:00:00+00:00" % rng.randint(10, 22), commit="c%d" % i))
    policy = FilterPolicy()
    a = filter_small(dedupe(batch), policy)
    b = dedupe(filter_small(batch, policy))
    assert a == b


# ---------------------------------------------------------------------------
# dedupe


def test_dedupe_keeps_earlier_commit():
    early = make_triplet(["a"], ["b"], when="2015-01-01T00:00:00+00:00", repo="r1")
    late = make_triplet(["a"], ["b"], when="2019-01-01T00:00:00+00:00", repo="r2")
    assert dedupe([late, early]) == [early]


def test_dedupe_no_duplicates_unchanged():
    batch = [make_triplet(["a", str(i)], ["b", str(i)], commit="c%d" % i) for i in range(10)]
    assert dedupe(batch) == batch


def test_dedupe_injected_duplicates_set_oracle():
    rng = random.Random(11)
    base = [
        make_triplet(["m", str(i)], ["n", str(i)], when="2018-01-0%dT00:00:00+00:00" % (1 + i % 9), commit="c%d" % i)
        for i in range(863)
    ]
    dupes = [
        make_triplet(list(t.prior), list(t.updated), when="2021-01-01T00:00:00+00:00", commit="d%d" % i)
        for i, t in enumerate(rng.sample(base, 137))
    ]
    batch = base + dupes
    rng.shuffle(batch)
    survivors = dedupe(batch)
    assert len(survivors) == 863
    assert len({(s.prior, s.updated) for s in survivors}) == 863
    assert all(s.commit_hash.startswith("c") for s in survivors)


# ---------------------------------------------------------------------------
# mine_repo


def _ts(day, hour=12):
    return "2019-01-%02dT%02d:00:00+00:00" % (day, hour)


def test_mine_single_commit_single_edit(tmp_path):
    repo = GitRepoBuilder(tmp_path / "one")
    repo.write("A.java", "class A { int f() { return 1; } }\n")
    repo.commit("initial", _ts(1))
    repo.write("A.java", "class A { int f() { return 2; } }\n")
    repo.commit("bump return value", _ts(2))
    triplets = mine_repo(tmp_path / "one")
    assert len(triplets) == 1
    t = triplets[0]
    assert t.message == "bump return value"
    assert "1" in t.prior and "2" in t.updated
    assert t.repo_id == "one"
    assert t.commit_time == datetime(2019, 1, 2, 12, tzinfo=timezone.utc)


CODE1_BEFORE = """
class ContactView {
    private Drawable getDefaultContactImage() {
        if (sDefaultContactImage == null)
            sDefaultContactImage = context.getResources()
                .getDrawable(R.drawable.ic_contact_picture);
        return sDefaultContactImage;
    }
}
"""

CODE1_AFTER = """
class ContactView {
    private Drawable getDefaultContactImage() {
        if (sDefaultContactImage == null)
            sDefaultContactImage = ResourcesCompat
                .getDrawable(getContext().getResources(),
                R.drawable.ic_default_contact, getContext().getTheme());
        return sDefaultContactImage;
    }
}
"""


def test_mine_api_replacement_change(tmp_path):
    repo = GitRepoBuilder(tmp_path / "kontalk")
    repo.write("ContactView.java", CODE1_BEFORE)
    repo.commit("initial", _ts(1))
    repo.write("ContactView.java", CODE1_AFTER)
    repo.commit("use compat drawable lookup", _ts(3))
    triplets = mine_repo(tmp_path / "kontalk")
    assert len(triplets) == 1
    assert "ResourcesCompat" in triplets[0].updated
    assert "ResourcesCompat" not in triplets[0].prior


def _method(name, body_expr, params=""):
    return f"    int {name}({params}) {{ return {body_expr}; }}\n"


def _file(class_name, methods):
    return f"class {class_name} {{\n" + "".join(methods) + "}\n"


def test_mine_fixture_repo_manifest(tmp_path):
    """Ten commits, 17 method-level events: 15 body edits plus one method
    rename (which surfaces as one delete-only plus one add-only). The
    hand-audited manifest below lists the 15 expected triplets."""
    repo = GitRepoBuilder(tmp_path / "fix")

    main = {
        "alpha": "1", "beta": "2", "gamma": "3",
    }
    delta1, delta2 = "10", "20"
    util = {"fmt": "100", "parse": "200"}
    util_name = "Util.java"

    def write_main():
        methods = [_method(k, v) for k, v in main.items()]
        methods.append(_method("delta", delta1, "int a"))
        methods.append(_method("delta", delta2, "int a, int b"))
        repo.write("Main.java", _file("Main", methods))

    def write_util():
        repo.write(util_name, _file("Util", [_method(k, v) for k, v in util.items()]))

    manifest = []  # (message, file, method) hand-audited expectations

    write_main(); write_util()
    repo.commit("c01 initial", _ts(1))

    main["alpha"] = "11"; main["beta"] = "21"
    write_main()
    repo.commit("c02 edit alpha beta", _ts(2))
    manifest += [("c02 edit alpha beta", "Main.java", "alpha"), ("c02 edit alpha beta", "Main.java", "beta")]

    main["gamma"] = "31"; util["fmt"] = "101"
    write_main(); write_util()
    repo.commit("c03 edit gamma fmt", _ts(3))
    manifest += [("c03 edit gamma fmt", "Main.java", "gamma"), ("c03 edit gamma fmt", util_name, "fmt")]

    util["parseNum"] = util.pop("parse")  # method rename: delete + add
    write_util()
    repo.commit("c04 rename parse", _ts(4))

    main["alpha"] = "12"; delta2 = "22"
    write_main()
    repo.commit("c05 edit alpha delta2", _ts(5))
    manifest += [("c05 edit alpha delta2", "Main.java", "alpha"), ("c05 edit alpha delta2", "Main.java", "delta")]

    repo.move(util_name, "TextUtil.java")
    util_name = "TextUtil.java"
    util["fmt"] = "102"
    write_util()
    repo.commit("c06 move util edit fmt", _ts(6))
    manifest += [("c06 move util edit fmt", "TextUtil.java", "fmt")]

    main["beta"] = "23"; main["gamma"] = "32"
    write_main()
    repo.commit("c07 edit beta gamma", _ts(7))
    manifest += [("c07 edit beta gamma", "Main.java", "beta"), ("c07 edit beta gamma", "Main.java", "gamma")]

    util["parseNum"] = "201"; util["fmt"] = "103"
    write_util()
    repo.commit("c08 edit parse fmt", _ts(8))
    manifest += [("c08 edit parse fmt", util_name, "fmt"), ("c08 edit parse fmt", util_name, "parseNum")]

    delta1 = "13"
    main["gamma"] = "33"
    write_main()
    repo.commit("c09 edit delta1 gamma", _ts(9))
    manifest += [("c09 edit delta1 gamma", "Main.java", "delta"), ("c09 edit delta1 gamma", "Main.java", "gamma")]

    main["alpha"] = "14"
    util["parseNum"] = "202"
    write_main(); write_util()
    repo.commit("c10 edit alpha parse", _ts(10))
    manifest += [("c10 edit alpha parse", "Main.java", "alpha"), ("c10 edit alpha parse", util_name, "parseNum")]

    triplets = mine_repo(tmp_path / "fix")
    assert len(triplets) == 15

    def method_name(t):
        return t.prior[list(t.prior).index("(") - 1]

    mined = sorted((t.message, t.file_path, method_name(t)) for t in triplets)
    assert mined == sorted(manifest)
    for t in triplets:
        assert t.prior != t.updated


def test_mine_skips_merge_and_side_branch(tmp_path):
    repo = GitRepoBuilder(tmp_path / "merged")
    repo.write("A.java", "class A { int f() { return 1; } }\n")
    repo.commit("initial", _ts(1))
    repo.checkout("side", create=True)
    repo.write("A.java", "class A { int f() { return 5; } }\n")
    repo.commit("side edit", _ts(2))
    repo.checkout("main")
    repo.write("B.java", "class B { int g() { return 1; } }\n")
    repo.commit("main add", _ts(3))
    repo.merge("side", "merge side", _ts(4))
    triplets = mine_repo(tmp_path / "merged")
    # side-branch edit reaches main only through the merge commit, which is
    # skipped; first-parent mainline has no method edits at all
    assert triplets == []


def test_mine_skips_unparseable_file(tmp_path, caplog):
    repo = GitRepoBuilder(tmp_path / "broken")
    repo.write("A.java", "class A { int f() { return 1; } }\n")
    repo.write("B.java", "class B { int g() { return 1; } }\n")
    repo.commit("initial", _ts(1))
    repo.write("A.java", "class A { int f() { return 2; } }\n")
    repo.write("B.java", "class B { int g() { return 2; } /* unterminated\n")
    repo.commit("edit both", _ts(2))
    with caplog.at_level("WARNING"):
        triplets = mine_repo(tmp_path / "broken")
    assert [t.file_path for t in triplets] == ["A.java"]
    assert any("B.java" in r.message for r in caplog.records)


def test_mine_window_and_determinism(tmp_path):
    repo = GitRepoBuilder(tmp_path / "win")
    repo.write("A.java", "class A { int f() { return 0; } }\n")
    repo.commit("initial", _ts(1))
    for i, day in enumerate((5, 10, 15), start=1):
        repo.write("A.java", "class A { int f() { return %d; } }\n" % i)
        repo.commit("edit %d" % i, _ts(day))
    since = datetime(2019, 1, 6, tzinfo=timezone.utc)
    until = datetime(2019, 1, 12, tzinfo=timezone.utc)
    triplets = mine_repo(tmp_path / "win", since=since, until=until)
    assert [t.message for t in triplets] == ["edit 2"]
    again = mine_repo(tmp_path / "win", since=since, until=until)
    assert triplets == again


def test_mine_repo_error(tmp_path):
    with pytest.raises(RepoError):
        mine_repo(tmp_path / "missing")


def test_mine_repos_parallel_sorted(tmp_path):
    for name, day in (("r1", 4), ("r2", 2)):
        repo = GitRepoBuilder(tmp_path / name)
        repo.write("A.java", "class A { int f() { return 0; } }\n")
        repo.commit("initial", _ts(1))
        repo.write("A.java", "class A { int f() { return 9; } }\n")
        repo.commit("edit " + name, _ts(day))
    merged = mine_repos([tmp_path / "r1", tmp_path / "r2"], jobs=2)
    assert [t.repo_id for t in merged] == ["r2", "r1"]
    assert merged == mine_repos([tmp_path / "r1", tmp_path / "r2"], jobs=1)


def test_triplet_requires_difference():
    with pytest.raises(UpdateBenchError):
        make_triplet(["a"], ["a"])
