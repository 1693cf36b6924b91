"""Conditional string models q(tgt_form | src_form, slot pair) with full support.

The reference model interpolates a suffix-rewrite rule distribution (rules
extracted from training pairs by longest-common-prefix factorization) with a
smoothed character n-gram over the target slot's forms.  The n-gram component
gives every string in Sigma* positive probability.  An externally computed
score table can stand in for the reference model anywhere a scorer is needed.
"""

import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass

from .corpus import ROOT, EMPTY

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_LAMBDA_GRID = (0.5, 0.2, 0.1, 0.05, 0.01, 0.001)
DEFAULT_LAMBDA = 0.05

BOS = "<S>"
EOS = "</S>"
UNK = "<UNK>"


def _log2add(a, b):
    """log2(2^a + 2^b), tolerating -inf."""
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


class CharNGram:
    """Add-alpha smoothed character n-gram over Sigma* (stop symbol included).

    Every history assigns positive probability to every character, to UNK and
    to stopping, so the model is a proper distribution over all finite strings.
    """

    def __init__(self, order=3, alpha=0.1, alphabet=()):
        self.order = order
        self.alpha = alpha
        self.alphabet = sorted(alphabet)
        # normalization vocabulary is Sigma plus stop; out-of-alphabet
        # characters are scored through an UNK escape with the bare add-alpha
        # numerator, outside the normalization, so Sigma* mass still sums to 1
        self._vocab = self.alphabet + [EOS]
        self._known = set(self.alphabet)
        self.counts = defaultdict(Counter)   # history tuple -> next symbol counts
        self._totals = {}

    def _events(self, form):
        hist = (BOS,) * (self.order - 1)
        known = self._known
        for ch in form:
            sym = ch if ch in known else UNK
            yield hist, sym
            hist = (hist + (sym,))[-(self.order - 1):] if self.order > 1 else ()
        yield hist, EOS

    def add(self, form):
        for hist, sym in self._events(form):
            self.counts[hist][sym] += 1
            self._totals[hist] = self._totals.get(hist, 0) + 1

    def prob(self, hist, sym):
        c = self.counts.get(hist)
        total = self._totals.get(hist, 0)
        num = (c[sym] if c else 0) + self.alpha
        return num / (total + self.alpha * len(self._vocab))

    def logprob(self, form):
        """log2 probability of generating the form and stopping."""
        lp = 0.0
        for hist, sym in self._events(form):
            lp += math.log2(self.prob(hist, sym))
        return lp

    def mass_upto(self, max_len):
        """Total probability of strings over the known alphabet with length
        <= max_len, by dynamic programming over histories (UNK excluded:
        the mass is over Sigma* proper)."""
        init = (BOS,) * (self.order - 1)
        states = {init: 1.0}
        mass = 0.0
        for _ in range(max_len + 1):
            nxt = defaultdict(float)
            for hist, p in states.items():
                mass += p * self.prob(hist, EOS)
                for ch in self.alphabet:
                    h2 = (hist + (ch,))[-(self.order - 1):] if self.order > 1 else ()
                    nxt[h2] += p * self.prob(hist, ch)
            states = nxt
        return mass

    def to_json(self):
        return {
            "order": self.order,
            "alpha": self.alpha,
            "alphabet": self.alphabet,
            "counts": [[list(h), dict(c)] for h, c in sorted(self.counts.items())],
        }

    @classmethod
    def from_json(cls, obj):
        m = cls(order=obj["order"], alpha=obj["alpha"], alphabet=obj["alphabet"])
        for hist, c in obj["counts"]:
            m.counts[tuple(hist)] = Counter(c)
            m._totals[tuple(hist)] = sum(c.values())
        return m


def extract_rule(src, tgt):
    """Suffix-rewrite rule from the longest common prefix of src and tgt."""
    i = 0
    n = min(len(src), len(tgt))
    while i < n and src[i] == tgt[i]:
        i += 1
    return src[i:], tgt[i:]


class ConditionalParadigmModel:
    """Shared model for all slot-pair transductions of one language+POS.

    rule_tables[(src_slot, tgt_slot)] maps (src_suffix, tgt_suffix) -> count.
    char_models[tgt_slot] is the per-slot n-gram; a global fallback n-gram
    covers slots unseen as targets in training.
    """

    def __init__(self, alphabet, order=3, alpha=0.1, lam=DEFAULT_LAMBDA):
        self.alphabet = sorted(alphabet)
        self.order = order
        self.alpha = alpha
        self.lam = lam
        self.rule_tables = defaultdict(Counter)
        self.char_models = {}
        self.fallback_char = CharNGram(order, alpha, self.alphabet)

    def char_model(self, tgt_slot):
        return self.char_models.get(tgt_slot, self.fallback_char)

    def _rules_prob(self, src, src_slot, tgt_slot, tgt):
        """(has_applicable, prob of producing exactly tgt from src)."""
        table = self.rule_tables.get((src_slot, tgt_slot))
        if not table:
            return False, 0.0
        total = 0.0
        hit = 0.0
        for (s_sfx, t_sfx), count in table.items():
            if not src.endswith(s_sfx):
                continue
            w = count + self.alpha
            total += w
            if src[:len(src) - len(s_sfx)] + t_sfx == tgt:
                hit += w
        if total == 0.0:
            return False, 0.0
        return True, hit / total

    def _components(self, src, src_slot, tgt_slot, tgt):
        """(has_rules, rule prob, char log2prob) for one mapping."""
        lc = self.char_model(tgt_slot).logprob(tgt)
        if src_slot == ROOT:
            return False, 0.0, lc
        has_rules, pr = self._rules_prob(src, src_slot, tgt_slot, tgt)
        return has_rules, pr, lc

    @staticmethod
    def _mix(lam, has_rules, pr, lc):
        if not has_rules:
            return lc
        lr = math.log2(pr) + math.log2(1.0 - lam) if pr > 0.0 else -math.inf
        return _log2add(lr, math.log2(lam) + lc)

    def logprob(self, src, src_slot, tgt_slot, tgt):
        """log2 q(tgt | src, slot pair) in bits (<= 0, always finite).

        Root context (src_slot == ROOT) scores the target with the char
        model alone, as does any context with no applicable rewrite rule.
        """
        return self._mix(self.lam, *self._components(src, src_slot, tgt_slot, tgt))

    def mass_upto(self, src, src_slot, tgt_slot, max_len):
        """Total q(tgt | context) mass over strings of length <= max_len.

        Exact: the rule component has finite support (one output string per
        applicable rule) and the char component is summed by DP.
        """
        char_mass = self.char_model(tgt_slot).mass_upto(max_len)
        if src_slot == ROOT:
            return char_mass
        table = self.rule_tables.get((src_slot, tgt_slot))
        applicable = []
        if table:
            for (s_sfx, t_sfx), count in table.items():
                if src.endswith(s_sfx):
                    applicable.append((src[:len(src) - len(s_sfx)] + t_sfx, count + self.alpha))
        if not applicable:
            return char_mass
        total = sum(w for _, w in applicable)
        known = set(self.alphabet)
        rule_mass = sum(w for out, w in applicable
                        if len(out) <= max_len and all(c in known for c in out)) / total
        return (1.0 - self.lam) * rule_mass + self.lam * char_mass

    def to_json(self):
        return {
            "version": FORMAT_VERSION,
            "alphabet": self.alphabet,
            "order": self.order,
            "alpha": self.alpha,
            "lambda": self.lam,
            "rule_tables": [
                [src_slot, tgt_slot, [[s, t, c] for (s, t), c in sorted(tbl.items())]]
                for (src_slot, tgt_slot), tbl in sorted(self.rule_tables.items())
            ],
            "char_models": {slot: m.to_json() for slot, m in sorted(self.char_models.items())},
            "fallback_char": self.fallback_char.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        if obj.get("version") != FORMAT_VERSION:
            raise ValueError("unsupported model format version %r" % obj.get("version"))
        m = cls(alphabet=obj["alphabet"], order=obj["order"], alpha=obj["alpha"],
                lam=obj["lambda"])
        for src_slot, tgt_slot, rules in obj["rule_tables"]:
            m.rule_tables[(src_slot, tgt_slot)] = Counter({(s, t): c for s, t, c in rules})
        m.char_models = {slot: CharNGram.from_json(cm)
                         for slot, cm in obj["char_models"].items()}
        m.fallback_char = CharNGram.from_json(obj["fallback_char"])
        return m

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, ensure_ascii=False, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def cross_entropy(scorer, pairs):
    """Mean negative log2 probability over a pair list, in bits."""
    if not pairs:
        raise ValueError("empty pair list")
    total = 0.0
    for p in pairs:
        total -= scorer.logprob(p.src, p.src_slot, p.tgt_slot, p.tgt)
    return total / len(pairs)


def train(pairs, dev_pairs=None, order=3, alpha=0.1, lambda_grid=DEFAULT_LAMBDA_GRID):
    """Fit the shared conditional model by accumulating rule and n-gram
    counts from training pairs, then pick the mixture weight minimizing
    dev cross-entropy."""
    if not pairs:
        raise ValueError("cannot train on an empty pair list")
    alphabet = set()
    for p in pairs:
        alphabet.update(p.src)
        alphabet.update(p.tgt)
    model = ConditionalParadigmModel(alphabet, order=order, alpha=alpha)
    for p in pairs:
        if p.src_slot != ROOT:
            model.rule_tables[(p.src_slot, p.tgt_slot)][extract_rule(p.src, p.tgt)] += 1
        if p.tgt_slot not in model.char_models:
            model.char_models[p.tgt_slot] = CharNGram(order, alpha, model.alphabet)
        model.char_models[p.tgt_slot].add(p.tgt)
        model.fallback_char.add(p.tgt)
    if dev_pairs:
        comps = [model._components(p.src, p.src_slot, p.tgt_slot, p.tgt) for p in dev_pairs]
        best = None
        for lam in lambda_grid:
            ce = -sum(model._mix(lam, *c) for c in comps) / len(comps)
            if best is None or ce < best[0]:
                best = (ce, lam)
        model.lam = best[1]
        log.info("selected lambda=%g (dev CE %.4f bits)", best[1], best[0])
    else:
        model.lam = DEFAULT_LAMBDA
        log.info("empty dev set: lambda defaults to %g", DEFAULT_LAMBDA)
    return model


def joint_logprob(model, tree, paradigm):
    """log2 q(m_1..m_n) under the tree-factored joint (bits, <= 0).

    Unfilled slots are skipped; a filled slot whose parent is unfilled (or
    absent from the paradigm) is conditioned on the root context.
    """
    total = 0.0
    for i, slot in enumerate(tree.slots):
        tgt = paradigm.entries.get(slot)
        if tgt is None:
            continue
        parent = tree.parent.get(i)
        if parent is None:
            total += model.logprob(EMPTY, ROOT, slot, tgt)
        else:
            src_slot = tree.slots[parent]
            src = paradigm.entries.get(src_slot)
            if src is None:
                total += model.logprob(EMPTY, ROOT, slot, tgt)
            else:
                total += model.logprob(src, src_slot, slot, tgt)
    return total


class ScoreTableError(ValueError):
    pass


class ScoreTable:
    """Externally computed log2 scores, keyed by the full mapping tuple.

    Missing lookups are hard errors: a partial table must not silently fall
    back to anything.
    """

    def __init__(self, scores=None):
        self.scores = dict(scores or {})

    def logprob(self, src, src_slot, tgt_slot, tgt):
        key = (src, src_slot, tgt_slot, tgt)
        if key not in self.scores:
            raise ScoreTableError("no score for mapping %r" % (key,))
        return self.scores[key]


def load_scores(stream):
    """Parse a score TSV: src, src_slot, tgt_slot, tgt, log2prob per row.

    An empty src_slot field (or the literal ROOT sentinel) marks a root
    mapping.  Positive log-probabilities are rejected.
    """
    scores = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise ScoreTableError("line %d: expected 5 tab-separated fields" % lineno)
        src, src_slot, tgt_slot, tgt, lp = fields
        try:
            lp = float(lp)
        except ValueError:
            raise ScoreTableError("line %d: bad log2prob %r" % (lineno, fields[4]))
        if lp > 0:
            raise ScoreTableError("line %d: log2prob %g > 0" % (lineno, lp))
        if not src_slot or src_slot == ROOT:
            src, src_slot = EMPTY, ROOT
        scores[(src, src_slot, tgt_slot, tgt)] = lp
    return ScoreTable(scores)
