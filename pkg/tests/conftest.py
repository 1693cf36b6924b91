import pytest

from morphcomplexity.cli import bundled


@pytest.fixture
def toy_lexicon_path():
    return str(bundled("toy_lexicon.tsv"))


@pytest.fixture
def greek_plat():
    from morphcomplexity.platbaseline import parse_plat
    with open(bundled("greek_plat.tsv"), encoding="utf-8") as fh:
        return parse_plat(fh)


class StubScorer:
    """Fixed logprob lookup standing in for a trained model."""

    def __init__(self, scores, default=None):
        self.scores = dict(scores)
        self.default = default

    def logprob(self, src, src_slot, tgt_slot, tgt):
        key = (src, src_slot, tgt_slot, tgt)
        if key in self.scores:
            return self.scores[key]
        if self.default is not None:
            return self.default
        raise KeyError(key)


@pytest.fixture
def stub_scorer():
    return StubScorer
