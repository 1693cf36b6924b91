"""Pipeline driver: subcommands for each stage plus full runs and reports."""

import argparse
import hashlib
import json
import logging
import random
import sys
from importlib import resources
from pathlib import Path

from . import complexity, corpus, platbaseline, stats, strmodel, structure, svgplot

log = logging.getLogger("morphcomplexity")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NO_DATA = 3
EXIT_INTERNAL = 4

PARADIGM_WARN_THRESHOLD = 500


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def bundled(name):
    """Path to a bundled data fixture."""
    return resources.files("morphcomplexity.data") / name


# ---------------------------------------------------------------- config

CONFIG_FIELDS = {
    "language": str, "data": str, "synth": str, "scores": str,
    "pos": str, "regime": str,
    "synth_paradigms": int,
    "paradigm_count": int, "pair_count": int,
    "dev_paradigms": int, "test_paradigms": int,
    "order": int, "alpha": float, "lambda_grid": str,
    "n_perm": int, "seed": int, "out_dir": str,
}

CONFIG_DEFAULTS = {
    "language": "unknown", "pos": "N", "regime": "purple",
    "synth_paradigms": 700,
    "paradigm_count": 600, "pair_count": 60000,
    "dev_paradigms": 50, "test_paradigms": 50,
    "order": 3, "alpha": 0.1,
    "lambda_grid": "0.5,0.2,0.1,0.05,0.01,0.001",
    "n_perm": 10000,
}


def load_config(path):
    """Flat key = value config file; '#' comments and blank lines skipped."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError("%s:%d: expected key = value" % (path, lineno), EXIT_PARSE)
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_FIELDS:
            raise CliError("%s:%d: unknown config key %r" % (path, lineno, key), EXIT_PARSE)
        try:
            cfg[key] = CONFIG_FIELDS[key](value.strip())
        except ValueError:
            raise CliError("%s:%d: bad value for %s: %r" % (path, lineno, key, value),
                           EXIT_PARSE)
    return cfg


def resolve_config(args, require_seed=True):
    """Defaults, then config file, then explicit CLI flags (flags win)."""
    cfg = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in CONFIG_FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg.get("seed") is None:
        if require_seed:
            raise CliError("--seed is required (set it in the config or on the "
                           "command line)", EXIT_PARSE)
        cfg["seed"] = 0
    return cfg


def config_hash(cfg):
    blob = json.dumps({k: cfg[k] for k in sorted(cfg)}, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def lambda_grid(cfg):
    return tuple(float(x) for x in str(cfg["lambda_grid"]).split(","))


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
                          encoding="utf-8")


# ---------------------------------------------------------------- data loading

def load_paradigm_store(path):
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    paradigms = [corpus.Paradigm(p["lexeme"], dict(p["entries"])) for p in obj["paradigms"]]
    return obj["inventory"], paradigms


def ingest_lexicon(data_path, pos):
    try:
        with open(data_path, encoding="utf-8") as fh:
            words, errors = corpus.parse_unimorph(fh)
    except OSError as e:
        raise CliError("cannot read %s: %s" % (data_path, e), EXIT_NO_DATA)
    for err in errors:
        log.error("%s: %s", data_path, err)
    if errors:
        raise CliError("%d malformed lines in %s" % (len(errors), data_path), EXIT_PARSE)
    inventory, paradigms = corpus.build_paradigms(words, pos_filter=pos)
    if not paradigms:
        raise CliError("no paradigms for POS %r in %s" % (pos, data_path), EXIT_NO_DATA)
    return inventory, paradigms


def obtain_paradigms(cfg):
    """Paradigms from a lexicon file or a synthetic generator config."""
    if cfg.get("synth"):
        spec = json.loads(Path(cfg["synth"]).read_text(encoding="utf-8"))
        system = complexity.synth_system(spec)
        rng = random.Random(cfg["seed"])
        paradigms = system.sample_paradigms(cfg["synth_paradigms"], rng)
        return sorted(system.slots), paradigms
    if cfg.get("data"):
        return ingest_lexicon(cfg["data"], cfg["pos"])
    raise CliError("either a data file or a synthetic generator config is required",
                   EXIT_NO_DATA)


def build_scorer(cfg, split):
    """Train the reference model, or load external scores when configured."""
    if cfg.get("scores"):
        with open(cfg["scores"], encoding="utf-8") as fh:
            return strmodel.load_scores(fh)
    return strmodel.train(split.train_pairs, dev_pairs=split.dev_pairs,
                          order=cfg["order"], alpha=cfg["alpha"],
                          lambda_grid=lambda_grid(cfg))


# ---------------------------------------------------------------- subcommands

def cmd_ingest(args):
    cfg = resolve_config(args, require_seed=False)
    inventory, paradigms = ingest_lexicon(cfg["data"], cfg["pos"])
    full = sum(1 for p in paradigms if len(p.entries) == len(inventory))
    if len(paradigms) < PARADIGM_WARN_THRESHOLD:
        log.warning("only %d paradigms: below the %d-paradigm threshold",
                    len(paradigms), PARADIGM_WARN_THRESHOLD)
    store = {
        "config_hash": config_hash(cfg), "seed": cfg.get("seed", 0),
        "language": cfg["language"], "pos": cfg["pos"],
        "inventory": inventory,
        "paradigms": [{"lexeme": p.lexeme, "entries": p.entries} for p in paradigms],
    }
    if args.out:
        _write_json(args.out, store)
    print("lexemes: %d" % len(paradigms))
    print("slots: %d" % len(inventory))
    print("full paradigms: %d" % full)
    print("coverage: %.1f%%" % (100.0 * sum(len(p.entries) for p in paradigms)
                                / (len(paradigms) * len(inventory))))
    return EXIT_OK


def _make_split(cfg, paradigms):
    spec = corpus.SplitSpec(regime=cfg["regime"], paradigm_count=cfg["paradigm_count"],
                            pair_count=cfg["pair_count"], dev_paradigms=cfg["dev_paradigms"],
                            test_paradigms=cfg["test_paradigms"], seed=cfg["seed"])
    try:
        return corpus.make_split(paradigms, spec)
    except corpus.InsufficientDataError as e:
        raise CliError(str(e), EXIT_NO_DATA)


def cmd_split(args):
    cfg = resolve_config(args)
    _, paradigms = load_paradigm_store(args.store)
    split = _make_split(cfg, paradigms)
    obj = corpus.split_to_json(split)
    obj["config_hash"] = config_hash(cfg)
    _write_json(args.out, obj)
    print("train pairs: %d, dev paradigms: %d, test paradigms: %d"
          % (len(split.train_pairs), len(split.dev_paradigms), len(split.test_paradigms)))
    return EXIT_OK


def cmd_train(args):
    cfg = resolve_config(args)
    split = corpus.load_split(args.split)
    model = strmodel.train(split.train_pairs, dev_pairs=split.dev_pairs,
                           order=cfg["order"], alpha=cfg["alpha"],
                           lambda_grid=lambda_grid(cfg))
    model.save(args.out)
    print("trained on %d pairs; lambda=%g" % (len(split.train_pairs), model.lam))
    return EXIT_OK


def _inventory_of(split):
    slots = set()
    for p in split.dev_paradigms + split.test_paradigms:
        slots.update(p.entries)
    for pair in split.train_pairs:
        slots.add(pair.tgt_slot)
    return sorted(slots)


def cmd_weights(args):
    cfg = resolve_config(args)
    split = corpus.load_split(args.split)
    scorer = (strmodel.ConditionalParadigmModel.load(args.model) if args.model
              else build_scorer(cfg, split))
    W = structure.compute_weights(scorer, split.dev_paradigms, _inventory_of(split))
    obj = W.to_json()
    obj["config_hash"] = config_hash(cfg)
    obj["seed"] = cfg["seed"]
    _write_json(args.out, obj)
    print("weights over %d slots written to %s" % (W.n, args.out))
    return EXIT_OK


def cmd_learn_tree(args):
    cfg = resolve_config(args, require_seed=False)
    obj = json.loads(Path(args.weights).read_text(encoding="utf-8"))
    W = structure.WeightMatrix.from_json(obj)
    tree = structure.max_arborescence(W)
    out = tree.to_json()
    out["score_bits"] = structure.tree_score(tree, W)
    out["config_hash"] = config_hash(cfg)
    out["seed"] = cfg["seed"]
    _write_json(args.out, out)
    if args.dot:
        Path(args.dot).write_text(tree.to_dot(), encoding="utf-8")
    print("root: %s, score: %.4f bits" % (tree.slots[tree.root], out["score_bits"]))
    return EXIT_OK


def run_pipeline(cfg):
    """split -> train -> weights -> tree -> measure, returning all artifacts."""
    stage = "ingest"
    try:
        inventory, paradigms = obtain_paradigms(cfg)
        stage = "split"
        split = _make_split(cfg, paradigms)
        stage = "train"
        scorer = build_scorer(cfg, split)
        stage = "weights"
        W = structure.compute_weights(scorer, split.dev_paradigms, inventory)
        stage = "learn-tree"
        tree = structure.max_arborescence(W)
        stage = "measure"
        e_c = complexity.e_complexity(paradigms)
        i_total, _ = complexity.i_complexity(scorer, tree, split.test_paradigms)
        point = complexity.ComplexityPoint(
            language=cfg["language"], pos=cfg["pos"], regime=cfg["regime"],
            e_complexity=e_c, i_total_bits=i_total, i_per_form_bits=i_total / e_c,
            d=len(split.test_paradigms), seed=cfg["seed"])
    except CliError:
        raise
    except (ValueError, OSError) as e:
        raise CliError("stage %s failed: %s" % (stage, e), EXIT_INTERNAL)
    return point, tree, W, split, scorer


def cmd_run(args):
    cfg = resolve_config(args)
    out_dir = Path(cfg.get("out_dir") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    point, tree, W, split, scorer = run_pipeline(cfg)
    chash = config_hash(cfg)

    with open(out_dir / "point.csv", "w", encoding="utf-8", newline="") as fh:
        complexity.write_points_csv([point], fh)
    tree_obj = tree.to_json()
    tree_obj["score_bits"] = structure.tree_score(tree, W)
    tree_obj["config_hash"] = chash
    tree_obj["seed"] = cfg["seed"]
    _write_json(out_dir / "tree.json", tree_obj)
    (out_dir / "tree.dot").write_text(tree.to_dot(), encoding="utf-8")
    manifest = {"config": {k: cfg[k] for k in sorted(cfg)}, "config_hash": chash,
                "seed": cfg["seed"], "format_version": strmodel.FORMAT_VERSION}
    _write_json(out_dir / "manifest.json", manifest)
    print("%s/%s (%s): e=%d, i_total=%.4f bits, i_per_form=%.4f bits"
          % (point.language, point.pos, point.regime, point.e_complexity,
             point.i_total_bits, point.i_per_form_bits))
    return EXIT_OK


def cmd_measure(args):
    cfg = resolve_config(args)
    split = corpus.load_split(args.split)
    scorer = strmodel.ConditionalParadigmModel.load(args.model)
    tree_obj = json.loads(Path(args.tree).read_text(encoding="utf-8"))
    W_slots = _inventory_of(split)
    tree = structure.Arborescence.from_json(tree_obj, W_slots)
    e_c = len(W_slots)
    i_total, _ = complexity.i_complexity(scorer, tree, split.test_paradigms)
    point = complexity.ComplexityPoint(
        language=cfg["language"], pos=cfg["pos"], regime=cfg["regime"],
        e_complexity=e_c, i_total_bits=i_total, i_per_form_bits=i_total / e_c,
        d=len(split.test_paradigms), seed=cfg["seed"])
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        complexity.write_points_csv([point], fh)
    print("i_total=%.4f bits over %d test paradigms" % (i_total, point.d))
    return EXIT_OK


def _read_table2(path):
    import csv as _csv
    points = {"N": [], "V": []}
    with open(path, encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            points[row["pos"]].append((float(row["paradigm_size"]),
                                       float(row["i_complexity"])))
    return points


def cmd_pareto(args):
    cfg = resolve_config(args)
    path = args.points or str(bundled("table2_green.csv"))
    if args.points and _is_point_csv(path):
        by_pos = {}
        with open(path, encoding="utf-8") as fh:
            for pt in complexity.read_points_csv(fh):
                by_pos.setdefault(pt.pos, []).append(
                    (float(pt.e_complexity), pt.i_per_form_bits))
    else:
        by_pos = _read_table2(path)
    out_dir = Path(cfg.get("out_dir") or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"config_hash": config_hash(cfg), "seed": cfg["seed"], "per_pos": {}}
    failures = []
    for pos in sorted(by_pos):
        pts = by_pos[pos]
        if len(pts) < 3:
            failures.append(pos)
            report["per_pos"][pos] = {"error": "need >= 3 points, have %d" % len(pts)}
            continue
        res = stats.perm_test(pts, n_perm=cfg["n_perm"], seed=cfg["seed"])
        report["per_pos"][pos] = res.to_json()
        svg = svgplot.scatter_with_pareto(pts, title="%s (p = %.4f)" % (pos, res.p_value))
        (out_dir / ("pareto_%s.svg" % pos)).write_text(svg, encoding="utf-8")
        print("%s: area=%.3f, p=%.4f (%d permutations)"
              % (pos, res.observed_area, res.p_value, res.n_perm))
    _write_json(out_dir / "pareto_report.json", report)
    if failures and len(failures) == len(by_pos):
        raise CliError("no POS had enough points", EXIT_NO_DATA)
    return EXIT_OK


def _is_point_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    return "i_per_form_bits" in header


def cmd_plat(args):
    resolve_config(args, require_seed=False)
    path = args.plat or str(bundled("greek_plat.tsv"))
    try:
        with open(path, encoding="utf-8") as fh:
            plat = platbaseline.parse_plat(fh)
    except (platbaseline.PlatError, OSError) as e:
        raise CliError("bad plat file %s: %s" % (path, e), EXIT_PARSE)
    print("plat: %d classes x %d slots" % (len(plat.classes), len(plat.slots)))
    for i in plat.slots:
        for j in plat.slots:
            if i != j:
                print("H(%s | %s) = %.6f bits" % (i, j, platbaseline.cond_entropy(plat, i, j)))
    avg = platbaseline.avg_cond_entropy(plat)
    print("average conditional entropy: %.6f bits" % avg)
    if args.critique:
        _critique(plat)
    return EXIT_OK


def _critique(plat):
    joint = platbaseline.joint_per_form_entropy(plat)
    avg = platbaseline.avg_cond_entropy(plat)
    print("critique: per-form joint entropy %.6f <= average conditional %.6f: %s"
          % (joint, avg, joint <= avg + 1e-9))
    # suppletion: the plat gives 'went' zero probability, the string model does not
    dist = platbaseline.cond_dist(plat, plat.slots[0], plat.slots[1],
                                  plat.exponent[0][1])
    pairs = [corpus.PairExample("go", "go", "V;NFIN", "went", "V;PST")]
    model = strmodel.train(pairs, dev_pairs=None)
    lp = model.logprob("fly", "V;NFIN", "V;PST", "flew")
    print("critique: plat support is only %r; string model gives an unseen "
          "irregular logprob %.2f bits (finite)" % (sorted(dist), lp))


def cmd_critique(args):
    cfg = resolve_config(args)
    rng = random.Random(cfg["seed"])
    worst = None
    for _ in range(args.trials):
        # realistically sized tables; with very few classes and slots the
        # pairwise average can dip below the joint (positive mutual
        # information between two slots raises the per-form joint instead)
        n_classes = rng.randint(8, 16)
        n_slots = rng.randint(6, 10)
        pool = ["", "a", "o", "es"]
        plat = platbaseline.Plat(
            classes=[str(c) for c in range(n_classes)],
            slots=["S%d" % s for s in range(n_slots)],
            exponent=[[rng.choice(pool) for _ in range(n_slots)]
                      for _ in range(n_classes)])
        gap = platbaseline.avg_cond_entropy(plat) - platbaseline.joint_per_form_entropy(plat)
        if worst is None or gap < worst:
            worst = gap
    print("joint-vs-average over %d random plats: min(avg - joint) = %.6f bits (>= 0: %s)"
          % (args.trials, worst, worst >= -1e-9))
    with open(bundled("greek_plat.tsv"), encoding="utf-8") as fh:
        _critique(platbaseline.parse_plat(fh))
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def _add_config_flags(sp, include=CONFIG_FIELDS):
    sp.add_argument("--config", help="flat key = value config file")
    for key in include:
        typ = CONFIG_FIELDS[key]
        sp.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="morphcomplexity",
                                 description="Morphological complexity measurement "
                                             "and the paradigm size/irregularity trade-off")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="parse a lexicon into a paradigm store")
    _add_config_flags(sp)
    sp.add_argument("--out", help="paradigm store JSON to write")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("split", help="build the train/dev/test split")
    _add_config_flags(sp)
    sp.add_argument("--store", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("train", help="fit the conditional string model")
    _add_config_flags(sp)
    sp.add_argument("--split", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("weights", help="compute the dev weight matrix")
    _add_config_flags(sp)
    sp.add_argument("--split", required=True)
    sp.add_argument("--model")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_weights)

    sp = sub.add_parser("learn-tree", help="maximum spanning arborescence")
    _add_config_flags(sp)
    sp.add_argument("--weights", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--dot")
    sp.set_defaults(func=cmd_learn_tree)

    sp = sub.add_parser("measure", help="held-out i-complexity from saved artifacts")
    _add_config_flags(sp)
    sp.add_argument("--split", required=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--tree", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("run", help="full pipeline for one language/POS")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("pareto", help="Pareto curves, areas and permutation test")
    _add_config_flags(sp)
    sp.add_argument("--points", help="ComplexityPoint CSV (default: bundled reference table)")
    sp.set_defaults(func=cmd_pareto)

    sp = sub.add_parser("plat", help="conditional-entropy baseline over a plat")
    _add_config_flags(sp)
    sp.add_argument("--plat", help="plat TSV (default: bundled Greek plat)")
    sp.add_argument("--critique", action="store_true")
    sp.set_defaults(func=cmd_plat)

    sp = sub.add_parser("critique", help="baseline-vs-joint demonstrations")
    _add_config_flags(sp)
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_critique)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as e:
        log.error("%s", e)
        return e.code
    except corpus.LexiconFormatError as e:
        log.error("%s", e)
        return EXIT_PARSE
    except Exception as e:  # pragma: no cover - internal failure path
        log.exception("internal error: %s", e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
