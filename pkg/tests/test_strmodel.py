import io
import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from morphcomplexity import strmodel
from morphcomplexity.corpus import EMPTY, ROOT, PairExample
from morphcomplexity.strmodel import (
    CharNGram, ConditionalParadigmModel, ScoreTable, ScoreTableError,
    cross_entropy, extract_rule, joint_logprob, load_scores, train,
)


def mk_pairs(mappings, src_slot="S", tgt_slot="T"):
    return [PairExample("lex%d" % i, s, src_slot, t, tgt_slot)
            for i, (s, t) in enumerate(mappings)]


def all_strings(alphabet, max_len):
    for length in range(max_len + 1):
        for tup in itertools.product(alphabet, repeat=length):
            yield "".join(tup)


# ----------------------------------------------------------- rule extraction

def test_extract_rule_hand_example():
    assert extract_rule("Hand", "Hände") == ("and", "ände")


def test_extract_rule_pure_suffix():
    assert extract_rule("walk", "walked") == ("", "ed")


@given(st.text("abc", max_size=8), st.text("abc", max_size=8))
def test_extract_rule_roundtrip(src, tgt):
    s_sfx, t_sfx = extract_rule(src, tgt)
    assert src.endswith(s_sfx)
    assert src[:len(src) - len(s_sfx)] + t_sfx == tgt


# ----------------------------------------------------------- char n-gram

def test_char_ngram_sums_to_one_per_history():
    m = CharNGram(order=2, alpha=0.5, alphabet="ab")
    for form in ["ab", "ba", "aab", ""]:
        m.add(form)
    for hist in list(m.counts) + [("x",)]:
        total = sum(m.prob(hist, sym) for sym in m.alphabet + ["</S>"])
        assert total == pytest.approx(1.0, abs=1e-12)
        assert all(m.prob(hist, sym) > 0 for sym in m.alphabet + ["</S>", "<UNK>"])


def test_char_ngram_mass_matches_enumeration():
    m = CharNGram(order=2, alpha=0.3, alphabet="ab")
    for form in ["ab", "abb", "a", "bba"]:
        m.add(form)
    for L in (0, 1, 4, 8, 12):
        brute = sum(2.0 ** m.logprob(s) for s in all_strings("ab", L))
        assert m.mass_upto(L) == pytest.approx(brute, abs=1e-12)


def test_char_ngram_empty_string_valid():
    m = CharNGram(order=3, alpha=0.1, alphabet="ab")
    m.add("")
    assert m.logprob("") < 0
    assert math.isfinite(m.logprob(""))


# ----------------------------------------------------------- logprob

def test_logprob_half_lambda_hand_computation():
    model = train(mk_pairs([("a", "b")]))
    model.lam = 0.5
    # the only rule rewrites "a" -> "b" with probability 1, so
    # q(b|a) = 0.5 * 1 + 0.5 * q_char(b) > 0.5
    lp = model.logprob("a", "S", "T", "b")
    q_char = 2.0 ** model.char_model("T").logprob("b")
    assert 2.0 ** lp == pytest.approx(0.5 + 0.5 * q_char, rel=1e-12)
    assert lp > -1.0


def test_logprob_root_uses_char_model_only():
    model = train(mk_pairs([("a", "b"), ("aa", "ab")]))
    lp = model.logprob(EMPTY, ROOT, "T", "ab")
    assert lp == pytest.approx(model.char_model("T").logprob("ab"))


def test_logprob_always_finite():
    model = train(mk_pairs([("hand", "hände"), ("fuss", "füsse")]))
    rng = random.Random(0)
    chars = model.alphabet + ["z", "!"]
    for _ in range(2000):
        src = "".join(rng.choice(chars) for _ in range(rng.randint(0, 12)))
        tgt = "".join(rng.choice(chars) for _ in range(rng.randint(0, 12)))
        lp = model.logprob(src, "S", "T", tgt)
        assert math.isfinite(lp) and lp <= 0


def test_mass_enumeration_oracle_small_model():
    model = train(mk_pairs([("a", "ab"), ("b", "bb"), ("ab", "abb")]), order=2)
    model.lam = 0.2
    contexts = [("a", "S", "T"), ("ab", "S", "T"), (EMPTY, ROOT, "T"), ("zz", "S", "T")]
    for src, s, t in contexts:
        for L in (4, 8):
            brute = sum(2.0 ** model.logprob(src, s, t, tgt)
                        for tgt in all_strings("ab", L))
            assert model.mass_upto(src, s, t, L) == pytest.approx(brute, abs=1e-9)
    # in-alphabet conditioning contexts reach 0.999 within length 12
    for src, s, t in contexts[:3]:
        assert model.mass_upto(src, s, t, 12) >= 0.999


def test_mass_monotone_and_converges():
    model = train(mk_pairs([("ab", "ba"), ("aab", "aba")]), order=2)
    masses = [model.mass_upto("ab", "S", "T", L) for L in range(0, 33, 4)]
    assert all(b >= a - 1e-15 for a, b in zip(masses, masses[1:]))
    assert masses[-1] >= 0.999


def test_unseen_slot_pair_falls_back_to_char():
    model = train(mk_pairs([("a", "b")]))
    lp = model.logprob("a", "S2", "T", "b")
    assert lp == pytest.approx(model.char_model("T").logprob("b"))


# ----------------------------------------------------------- training

def test_train_rejects_empty():
    with pytest.raises(ValueError):
        train([])


def test_train_lambda_is_argmin_on_dev():
    rng = random.Random(4)
    stems = ["".join(rng.choice("abc") for _ in range(4)) for _ in range(200)]
    pairs = mk_pairs([(s, s + "s") for s in stems[:150]])
    dev = mk_pairs([(s, s + "s") for s in stems[150:]])
    grid = (0.5, 0.2, 0.1, 0.05, 0.01, 0.001)
    model = train(pairs, dev_pairs=dev, lambda_grid=grid)
    selected = model.lam
    ces = {}
    for lam in grid:
        model.lam = lam
        ces[lam] = cross_entropy(model, dev)
    assert selected == min(ces, key=ces.get)


def test_train_default_lambda_without_dev():
    model = train(mk_pairs([("a", "b")]), dev_pairs=None)
    assert model.lam == strmodel.DEFAULT_LAMBDA


def test_train_suffix_rule_dominates():
    rng = random.Random(7)
    stems = ["".join(rng.choice("abcd") for _ in range(rng.randint(3, 6)))
             for _ in range(1000)]
    pairs = mk_pairs([(s, s + "s") for s in stems[:900]])
    dev = mk_pairs([(s, s + "s") for s in stems[900:950]])
    model = train(pairs, dev_pairs=dev)
    held = stems[950:]
    probs = [2.0 ** model.logprob(s, "S", "T", s + "s") for s in held]
    assert min(probs) > 0.9


def test_mle_more_data_improves_dev_ce():
    # nested training sizes from one synthetic generator; dev CE should trend down
    def gen(rng, count):
        out = []
        for _ in range(count):
            stem = "".join(rng.choice("ab") for _ in range(rng.randint(3, 5)))
            suffix = "os" if rng.random() < 0.5 else "a"
            out.append((stem, stem + suffix))
        return out

    deltas = []
    for seed in range(5):
        rng = random.Random(seed)
        data = gen(rng, 900)
        dev = mk_pairs(gen(rng, 200))
        ces = [cross_entropy(train(mk_pairs(data[:size]), dev_pairs=None), dev)
               for size in (100, 300, 900)]
        deltas.append(ces[0] - ces[-1])
    assert sum(deltas) / len(deltas) > -0.05


# ----------------------------------------------------------- joint logprob

class Chain3:
    slots = ["A", "B", "C"]


def test_joint_logprob_single_slot(stub_scorer):
    from morphcomplexity.structure import Arborescence
    from morphcomplexity.corpus import Paradigm
    tree = Arborescence(slots=["A"], root=0, parent={})
    scorer = stub_scorer({(EMPTY, ROOT, "A", "fa"): -2.5})
    assert joint_logprob(scorer, tree, Paradigm("x", {"A": "fa"})) == -2.5


def test_joint_logprob_chain(stub_scorer):
    from morphcomplexity.structure import Arborescence
    from morphcomplexity.corpus import Paradigm
    tree = Arborescence(slots=["A", "B", "C"], root=0, parent={1: 0, 2: 1})
    scorer = stub_scorer({
        (EMPTY, ROOT, "A", "fa"): -1.0,
        ("fa", "A", "B", "fb"): -0.5,
        ("fb", "B", "C", "fc"): -0.25,
    })
    p = Paradigm("x", {"A": "fa", "B": "fb", "C": "fc"})
    assert joint_logprob(scorer, tree, p) == pytest.approx(-1.75)


def test_joint_logprob_stub_arithmetic(stub_scorer):
    from morphcomplexity.structure import Arborescence
    from morphcomplexity.corpus import Paradigm
    # root prob 0.5 (-1 bit), edge prob 0.25 (-2 bits) -> joint -3 bits
    tree = Arborescence(slots=["A", "B"], root=0, parent={1: 0})
    scorer = stub_scorer({
        (EMPTY, ROOT, "A", "fa"): math.log2(0.5),
        ("fa", "A", "B", "fb"): math.log2(0.25),
    })
    p = Paradigm("x", {"A": "fa", "B": "fb"})
    assert joint_logprob(scorer, tree, p) == pytest.approx(-3.0)


def test_joint_logprob_partial_parent_missing(stub_scorer):
    from morphcomplexity.structure import Arborescence
    from morphcomplexity.corpus import Paradigm
    tree = Arborescence(slots=["A", "B"], root=0, parent={1: 0})
    scorer = stub_scorer({(EMPTY, ROOT, "B", "fb"): -4.0})
    # A unfilled: B falls back to the root context
    assert joint_logprob(scorer, tree, Paradigm("x", {"B": "fb"})) == -4.0


# ----------------------------------------------------------- serialization

def test_model_json_roundtrip(tmp_path):
    model = train(mk_pairs([("hand", "hände"), ("gabel", "gabeln")]),
                  dev_pairs=mk_pairs([("wand", "wände")]))
    path = tmp_path / "model.json"
    model.save(path)
    back = ConditionalParadigmModel.load(path)
    assert back.lam == model.lam and back.order == model.order
    assert back.alphabet == model.alphabet
    for src, tgt in [("hand", "hände"), ("xyz", "xyzn"), ("", "")]:
        assert back.logprob(src, "S", "T", tgt) == model.logprob(src, "S", "T", tgt)
        assert back.logprob(EMPTY, ROOT, "T", tgt) == model.logprob(EMPTY, ROOT, "T", tgt)


def test_model_version_check():
    with pytest.raises(ValueError):
        ConditionalParadigmModel.from_json({"version": 999})


# ----------------------------------------------------------- score tables

def test_load_scores_roundtrip():
    table = load_scores(io.StringIO("walk\tV;NFIN\tV;PST\twalked\t-0.1\n"))
    assert table.logprob("walk", "V;NFIN", "V;PST", "walked") == -0.1


def test_load_scores_root_rows():
    table = load_scores(io.StringIO("\t\tV;PST\twalked\t-3.5\n"))
    assert table.logprob(EMPTY, ROOT, "V;PST", "walked") == -3.5


def test_score_lookup_missing_is_error():
    table = ScoreTable({})
    with pytest.raises(ScoreTableError) as exc:
        table.logprob("a", "S", "T", "b")
    assert "('a', 'S', 'T', 'b')" in str(exc.value)


def test_load_scores_rejects_positive_logprob():
    with pytest.raises(ScoreTableError):
        load_scores(io.StringIO("a\tS\tT\tb\t0.5\n"))


def test_load_scores_rejects_bad_shape():
    with pytest.raises(ScoreTableError):
        load_scores(io.StringIO("only\tthree\tfields\n"))
