import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmcr.data import (
    CorpusError,
    CorpusStats,
    ReviewSample,
    SplitSpec,
    ValidationError,
    batches,
    corpus_stats,
    dumps_corpus,
    extract_method_pairs,
    load_corpus,
    save_corpus,
    split,
    stats_by_repo,
)
from mmcr.java import serialize_tree, parse_method
from mmcr.synthetic import joint_corpus, ratio_corpus


def _record(**over):
    rec = {"id": "a1", "repo": "r", "original": "int f() { return 1; }",
           "revised": "int f() { return 2; }", "comment": "bump", "label": 1}
    rec.update(over)
    return rec


def _write(tmp_path, recs):
    p = tmp_path / "c.jsonl"
    p.write_text("".join((r if isinstance(r, str) else json.dumps(r)) + "\n" for r in recs))
    return p


def test_round_trip(tmp_path):
    samples = joint_corpus(12, seed=1)
    path = tmp_path / "out.jsonl"
    save_corpus(samples, path)
    assert load_corpus(path) == samples
    assert dumps_corpus(load_corpus(path)) == path.read_text()


def test_ast_records_round_trip(tmp_path):
    tree = serialize_tree(parse_method("int g(int a) { return a; }"))
    rec = {"id": "t", "repo": "r", "original_ast": tree, "revised_ast": tree, "comment": "", "label": 0}
    loaded = load_corpus(_write(tmp_path, [rec]))
    assert loaded[0].original == "" and loaded[0].to_dict() == rec
    orig, rev = loaded[0].graphs()
    assert orig.nodes == rev.nodes


def test_bad_label_rejected(tmp_path):
    with pytest.raises(ValidationError, match="line 2"):
        load_corpus(_write(tmp_path, [_record(), _record(id="b", label=2)]))
    with pytest.raises(ValidationError):
        load_corpus(_write(tmp_path, [_record(label=True)]))
    with pytest.raises(ValidationError):
        ReviewSample("x", "r", "a", "b", "", 3)


@pytest.mark.parametrize(
    "line, needle",
    [("{not json", "invalid JSON"), ("[1, 2]", "expected an object"),
     (json.dumps({"id": "q"}), "missing keys"), (json.dumps(_record(id="z", extra=1)), "unknown keys"),
     (json.dumps(_record(id="z", comment=5)), "must be a string")],
)
def test_malformed_lines_name_line_number(tmp_path, line, needle):
    with pytest.raises(CorpusError, match=f"line 3: .*{needle}"):
        load_corpus(_write(tmp_path, [_record(), "", line]))


def test_lenient_mode_allows_extra_keys(tmp_path):
    assert len(load_corpus(_write(tmp_path, [_record(extra=1)]), strict=False)) == 1


def test_duplicate_ids(tmp_path):
    with pytest.raises(ValidationError, match="duplicate"):
        load_corpus(_write(tmp_path, [_record(), _record()]))


def test_empty_code_rejected():
    with pytest.raises(ValidationError):
        ReviewSample("x", "r", "", "int f() {}", "", 1)


def test_stats():
    s = CorpusStats(20903, 9042)
    assert s.reject_rate == pytest.approx(0.4326, abs=1e-4)
    assert s.accepted_count == 20903 - 9042
    assert CorpusStats(0, 0).reject_rate == 0.0
    with pytest.raises(ValueError):
        CorpusStats(3, 4)
    corpus = ratio_corpus(50, 20, seed=0, repo="a") + ratio_corpus(10, 1, seed=1, repo="b")
    assert corpus_stats(corpus) == CorpusStats(60, 21)
    assert stats_by_repo(corpus) == {"a": CorpusStats(50, 20), "b": CorpusStats(10, 1)}


ORIGINAL = """
class A {
    int f(int x) { return x + 1; }
    int g() { return 0; }
    void h(String s) { s.trim(); }
}
"""


def test_extract_identical_gives_nothing():
    assert extract_method_pairs(ORIGINAL, ORIGINAL) == []


def test_extract_ignores_whitespace_and_comments():
    revised = ORIGINAL.replace("return 0;", "/* zero */ return   0;")
    assert extract_method_pairs(ORIGINAL, revised) == []


def test_extract_single_edit_and_added_method():
    revised = ORIGINAL.replace("x + 1", "x + 2").replace("}\n}", "}\n    int k() { return 9; }\n}")
    pairs = extract_method_pairs(ORIGINAL, revised)
    assert len(pairs) == 1
    old, new = pairs[0]
    assert "x + 1" in old and "x + 2" in new


def test_extract_overloads_paired_by_signature():
    a = "class B { int f(int a) { return a; } int f(String a) { return 1; } }"
    b = "class B { int f(int a) { return a; } int f(String a) { return 2; } }"
    pairs = extract_method_pairs(a, b)
    assert len(pairs) == 1 and "String" in pairs[0][0]


def test_split_deterministic_and_disjoint():
    corpus = ratio_corpus(200, 60, seed=2)
    a = split(corpus, SplitSpec(0.8, seed=4))
    b = split(corpus, SplitSpec(0.8, seed=4))
    assert a == b
    train, test = a
    assert len(train) == 160 and len(test) == 40
    assert {s.id for s in train}.isdisjoint({s.id for s in test})
    assert split(corpus, SplitSpec(0.8, seed=5)) != a


@given(st.integers(20, 120), st.floats(0.1, 0.9), st.integers(0, 2**16), st.floats(0.5, 0.9))
def test_stratified_split_keeps_rate(n, rate, seed, frac):
    rejected = max(1, int(n * rate))
    corpus = ratio_corpus(n, rejected, seed=0)
    train, test = split(corpus, SplitSpec(frac, seed=seed))
    assert len(train) + len(test) == n
    whole = rejected / n
    # rounding a class of size m moves the rate by at most 1/(2*len) per class
    assert abs(corpus_stats(train).reject_rate - whole) <= 0.02 + 1 / len(train)
    if len(test) >= 10:
        assert abs(corpus_stats(test).reject_rate - whole) <= 0.02 + 1.5 / len(test)


def test_split_fraction_validated():
    with pytest.raises(ValueError):
        SplitSpec(1.0)


def test_batches_sizes():
    assert [b.size for b in batches(list(range(10)), 4)] == [4, 4, 2]
    assert [b.samples for b in batches(list(range(5)), 2, seed=None)] == [[0, 1], [2, 3], [4]]
    with pytest.raises(ValueError):
        list(batches([1], 0))


@given(st.lists(st.integers(), max_size=40), st.integers(1, 12), st.integers(0, 1000))
def test_batches_partition(items, n, seed):
    out = list(batches(items, n, seed=seed))
    flat = [x for b in out for x in b.samples]
    assert sorted(flat) == sorted(items)
    assert all(b.size == n for b in out[:-1])
    assert all(1 <= b.size <= n for b in out)
    assert [b.samples for b in batches(items, n, seed=seed)] == [b.samples for b in out]
