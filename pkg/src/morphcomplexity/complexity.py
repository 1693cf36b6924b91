"""The two complexity measures, plus synthetic systems with known entropy."""

import csv
import math
from dataclasses import dataclass, asdict

from . import strmodel
from .corpus import Paradigm

CSV_FIELDS = ["language", "pos", "regime", "e_complexity",
              "i_total_bits", "i_per_form_bits", "d", "seed"]


@dataclass
class ComplexityPoint:
    language: str
    pos: str
    regime: str
    e_complexity: int
    i_total_bits: float
    i_per_form_bits: float
    d: int
    seed: int

    def csv_row(self):
        d = asdict(self)
        d["i_total_bits"] = "%.6f" % self.i_total_bits
        d["i_per_form_bits"] = "%.6f" % self.i_per_form_bits
        return d


def e_complexity(paradigms):
    """Maximum number of filled slots over the paradigms."""
    if not paradigms:
        raise ValueError("no paradigms")
    return max(len(p.entries) for p in paradigms)


def i_complexity(model, tree, test_paradigms):
    """Held-out cross-entropy of the tree-factored joint: mean negative
    log2-probability per test paradigm, and the same divided by the slot
    count n of the tree."""
    if not test_paradigms:
        raise ValueError("empty test set")
    d = len(test_paradigms)
    total = 0.0
    for p in test_paradigms:
        total -= strmodel.joint_logprob(model, tree, p)
    i_total = total / d
    n = len(tree.slots)
    return i_total, i_total / n


def write_points_csv(points, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for pt in points:
        writer.writerow(pt.csv_row())


def read_points_csv(fh):
    points = []
    for row in csv.DictReader(fh):
        points.append(ComplexityPoint(
            language=row["language"], pos=row["pos"], regime=row["regime"],
            e_complexity=int(row["e_complexity"]),
            i_total_bits=float(row["i_total_bits"]),
            i_per_form_bits=float(row["i_per_form_bits"]),
            d=int(row["d"]), seed=int(row["seed"])))
    return points


class SyntheticSystem:
    """Toy inflectional system with analytically known class entropy.

    Each lexeme draws a stem from the stem generator and an inflection class
    from the class distribution; form(slot) = stem + suffix[class][slot].
    The only irregularity is the class choice, so the per-paradigm entropy
    beyond the stem itself is exactly the class entropy (or less, when
    classes share suffixes in some slots).
    """

    def __init__(self, slots, class_probs, suffix_table, stem_alphabet="abcd",
                 stem_len=(3, 6)):
        if abs(sum(class_probs) - 1.0) > 1e-9 or any(p < 0 for p in class_probs):
            raise ValueError("class probabilities must be nonnegative and sum to 1")
        if len(suffix_table) != len(class_probs):
            raise ValueError("suffix table must have one row per class")
        if any(len(row) != len(slots) for row in suffix_table):
            raise ValueError("suffix table rows must cover every slot")
        self.slots = list(slots)
        self.class_probs = list(class_probs)
        self.suffix_table = [list(r) for r in suffix_table]
        self.stem_alphabet = stem_alphabet
        self.stem_len = stem_len

    @property
    def class_entropy(self):
        return -sum(p * math.log2(p) for p in self.class_probs if p > 0)

    def sample_paradigms(self, count, rng):
        paradigms = []
        for i in range(count):
            stem = "".join(rng.choice(self.stem_alphabet)
                           for _ in range(rng.randint(*self.stem_len)))
            c = rng.choices(range(len(self.class_probs)), weights=self.class_probs)[0]
            entries = {slot: stem + self.suffix_table[c][k]
                       for k, slot in enumerate(self.slots)}
            paradigms.append(Paradigm(lexeme="lex%06d" % i, entries=entries))
        return paradigms


def synth_system(spec):
    """Build a SyntheticSystem from a plain dict (the CLI's generator config)."""
    return SyntheticSystem(
        slots=spec["slots"],
        class_probs=spec["class_probs"],
        suffix_table=spec["suffix_table"],
        stem_alphabet=spec.get("stem_alphabet", "abcd"),
        stem_len=tuple(spec.get("stem_len", (3, 6))),
    )
