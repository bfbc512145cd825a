"""Command-line entry point: the full pipeline as subcommands.

Every run is reproducible: the same argv and inputs give byte-identical
outputs, and commands that write into a directory also write a manifest
echoing the resolved configuration and input digests.
"""

from __future__ import annotations

import argparse
import json
import os
import pathlib
import sys
from importlib import resources

from . import __version__, corpus, gcm, mgl, noncegen
from .errors import InputError, ItynessError
from .evaluation import (
    load_annotations,
    load_preference_records,
    load_probe_records,
    load_prompts,
    load_vocab_records,
)
from .ioutil import sha256_file
from .morphlex import AdjectiveClass, AffixInventory, Base, SuffixChoice, apply_suffix, parse_word
from .report import ReportConfig, ReportInputs, generate_report


def _fail(message, code=1):
    sys.stderr.write(json.dumps({"error": message}) + "\n")
    return code


def _apply_config_file(args, parser):
    """Optional key=value defaults; explicit flags win."""
    if not getattr(args, "config", None):
        return args
    overrides = {}
    with open(args.config, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{args.config}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            overrides[key.strip().replace("-", "_")] = value.strip()
    sub = None
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            sub = action.choices[args.subcommand]
    actions = {a.dest: a for a in sub._actions} if sub else {}
    for key, value in overrides.items():
        if key not in actions:
            raise InputError(f"unknown config key {key!r}")
        action = actions[key]
        if getattr(args, key) != action.default:
            continue  # an explicit flag wins over the config file
        if isinstance(action.const, bool) or isinstance(action.default, bool):
            setattr(args, key, value.lower() in ("1", "true", "yes"))
        elif action.type in (int, float):
            setattr(args, key, action.type(value))
        else:
            setattr(args, key, value)
    return args


def _write_derivatives(bases, path):
    """base, class and both derivative strings: the probe-adapter input."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("base\tclass\td_ity\td_ness\n")
        for b in bases:
            fh.write(
                f"{b.form}\t{b.cls.label}"
                f"\t{apply_suffix(b, SuffixChoice.ITY)}"
                f"\t{apply_suffix(b, SuffixChoice.NESS)}\n"
            )


def cmd_count(args):
    table = corpus.count_paths(args.corpus, fmt=args.format, threads=args.threads)
    table.save(args.out)
    print(f"{len(table)} distinct words, {table.total_tokens} tokens -> {args.out}")
    return 0


def cmd_extract(args):
    if args.freq:
        table = corpus.FrequencyTable.load(args.freq)
    else:
        table = corpus.count_paths(args.corpus, fmt=args.format, threads=args.threads)
    entries = corpus.extract_lexicon(table)
    corpus.save_lexicon(entries, args.out)
    if args.derivatives_out:
        _write_derivatives([e.base for e in entries], args.derivatives_out)
    print(f"{len(entries)} lexicon entries -> {args.out}")
    return 0


def cmd_stats(args):
    entries = corpus.load_lexicon(args.lexicon)
    corpus.class_stats(entries).to_csv(args.out)
    print(f"class statistics -> {args.out}")
    return 0


def cmd_nonce(args):
    entries = corpus.load_lexicon(args.lexicon)
    cls = AdjectiveClass.parse(args.cls)
    words = [e.base.form for e in entries if e.base.cls is cls]
    model, modal = noncegen.train_bigrams(words)
    freq = corpus.FrequencyTable.load(args.corpus_freq)
    per_length = args.count // 2
    spec = noncegen.NonceSpec(
        cls=cls, lengths=modal, per_length=per_length, seed=args.seed,
        max_attempts=args.max_attempts,
    )
    out = noncegen.generate(model, spec, freq, known=set(words))
    noncegen.save_nonces(out, args.out)
    if args.derivatives_out:
        _write_derivatives(out, args.derivatives_out)
    print(f"{len(out)} nonce bases ({cls.label}, lengths {modal}) -> {args.out}")
    return 0


def cmd_mgl_train(args):
    entries = corpus.load_lexicon(args.lexicon)
    items = mgl.items_from_lexicon(entries, args.mode)
    model = mgl.train(items, mode=args.mode, alpha=args.alpha)
    model.save(args.out)
    print(f"{len(model)} rules ({args.mode} mode) -> {args.out}")
    return 0


def cmd_mgl_predict(args):
    model = mgl.MglModel.load(args.model)
    bases = noncegen.load_nonces(args.infile)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("base\tclass\tchoice\tconfidence\tcontext\n")
        for b in bases:
            pred = mgl.predict(model, b)
            fh.write(
                f"{b.form}\t{b.cls.label}\t{pred.choice.suffix}"
                f"\t{pred.rule.confidence:.6f}\t{pred.rule.context.render()}\n"
            )
    print(f"{len(bases)} predictions -> {args.out}")
    return 0


def cmd_gcm_train(args):
    entries = corpus.load_lexicon(args.lexicon)
    exemplars = gcm.exemplars_from_lexicon(entries, args.mode)
    sensitivity = args.sensitivity
    if args.fit:
        sensitivity = gcm.fit_sensitivity(
            entries, args.mode, max_queries=args.fit_sample, seed=args.seed
        )
        print(f"fitted sensitivity: {sensitivity:.6f}")
    elif sensitivity is None:
        sensitivity = gcm.default_sensitivity(args.mode)
    model = gcm.GcmModel(exemplars, sensitivity)
    model.save(args.out)
    print(f"{len(model.exemplars)} exemplars (c={sensitivity:.4f}) -> {args.out}")
    return 0


def cmd_gcm_predict(args):
    model = gcm.GcmModel.load(args.model, sensitivity=args.sensitivity)
    bases = noncegen.load_nonces(args.infile)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("base\tclass\tchoice\tp_ity\tp_ness\n")
        for b in bases:
            p = gcm.score(model, b)
            choice = gcm.predict(model, b)
            fh.write(
                f"{b.form}\t{b.cls.label}\t{choice.suffix}"
                f"\t{p[list(p)[0]]:.6f}\t{p[list(p)[1]]:.6f}\n"
            )
    print(f"{len(bases)} predictions -> {args.out}")
    return 0


def cmd_parse(args):
    inventory = AffixInventory.bundled()
    words = []
    if args.words:
        words = args.words
    elif args.infile:
        with open(args.infile, encoding="utf-8") as fh:
            words = [w.strip() for w in fh if w.strip()]
    rows = []
    for w in words:
        p = parse_word(w, inventory, max_depth=args.max_depth)
        rows.append(
            f"{w}\t{'complex' if p.is_complex else 'simplex'}"
            f"\t{p.stem or ''}\t{'+'.join(p.affix_sequence)}"
        )
    text = "\n".join(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _load_inputs(args) -> ReportInputs:
    paths = {}

    def track(name, p):
        if p:
            paths[name] = p
        return p

    lexicon = corpus.load_lexicon(track("lexicon", args.lexicon))
    seen = nonce = prefs = annotations = vocab = None
    if getattr(args, "probes", None):
        seen = load_probe_records(track("probes", args.probes))
    if getattr(args, "nonce_probes", None):
        nonce = load_probe_records(track("nonce_probes", args.nonce_probes))
    if getattr(args, "preferences", None):
        prefs = load_preference_records(track("preferences", args.preferences))
    if getattr(args, "annotations", None):
        annotations = load_annotations(track("annotations", args.annotations))
    if getattr(args, "vocab", None):
        vocab = load_vocab_records(track("vocab", args.vocab))
    return ReportInputs(
        lexicon=lexicon,
        seen_probes=seen,
        nonce_probes=nonce,
        preferences=prefs,
        annotations=annotations,
        vocab=vocab,
        paths=paths,
    )


def cmd_eval(args):
    inputs = _load_inputs(args)
    config = ReportConfig(
        alpha=args.alpha,
        sensitivity_type=args.sensitivity_type,
        sensitivity_token=args.sensitivity_token,
        seed=args.seed,
    )
    outputs = generate_report(inputs, config, args.out)
    print(f"{len(outputs)} artifacts -> {args.out}")
    return 0


def _bundled_fixture(name):
    here = pathlib.Path(__file__).resolve()
    for parent in here.parents:
        cand = parent / "fixtures" / name
        if cand.exists():
            return str(cand)
    raise InputError(f"bundled fixture {name!r} not found; pass explicit paths")


def cmd_report(args):
    fixture_args = argparse.Namespace(
        lexicon=args.lexicon or _bundled_fixture("lexicon_pile.tsv.gz"),
        probes=args.probes or _bundled_fixture("probes_seen.jsonl.gz"),
        nonce_probes=args.nonce_probes or _bundled_fixture("probes_nonce.jsonl.gz"),
        preferences=args.preferences or _bundled_fixture("preferences_gpt4.jsonl"),
        annotations=args.annotations or _bundled_fixture("annotations.tsv"),
        vocab=args.vocab or _bundled_fixture("vocab_familiarity.jsonl.gz"),
    )
    inputs = _load_inputs(fixture_args)
    config = ReportConfig(
        alpha=args.alpha,
        sensitivity_type=args.sensitivity_type,
        sensitivity_token=args.sensitivity_token,
        seed=args.seed,
    )
    outputs = generate_report(inputs, config, args.out)
    print(f"{len(outputs)} artifacts -> {args.out}")
    return 0


def _fixture_digests():
    out = {}
    try:
        data = resources.files("ityness.data")
        for name in ("prompts.json", "nonce_adjectives.tsv", "reference_targets.json"):
            path = data.joinpath(name)
            import hashlib

            out[name] = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
    except Exception:
        pass
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ityness",
        description="Rule-based and exemplar-based models of -ity/-ness "
        "nominalization, plus LM probe evaluation.",
    )
    parser.add_argument("--version", action="store_true", help="print version and fixture digests")
    sub = parser.add_subparsers(dest="subcommand")

    def common(p):
        p.add_argument("--config", help="optional key=value defaults file")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("count", help="count word frequencies in corpora")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--format", choices=("auto", "text", "jsonl"), default="auto")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("extract", help="extract the base/derivative lexicon")
    p.add_argument("--corpus", nargs="+")
    p.add_argument("--freq", help="precomputed frequency table")
    p.add_argument("--format", choices=("auto", "text", "jsonl"), default="auto")
    p.add_argument("--out", required=True)
    p.add_argument("--derivatives-out", dest="derivatives_out",
                   help="also write base+derivative TSV for the probe adapter")
    common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("stats", help="per-class derivative statistics")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("nonce", help="generate nonce adjectives")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--corpus-freq", dest="corpus_freq", required=True)
    p.add_argument("--max-attempts", dest="max_attempts", type=int, default=100_000)
    p.add_argument("--out", required=True)
    p.add_argument("--derivatives-out", dest="derivatives_out",
                   help="also write base+derivative TSV for the probe adapter")
    common(p)
    p.set_defaults(func=cmd_nonce)

    p = sub.add_parser("mgl-train", help="train the rule model")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--mode", choices=("type", "token"), default="type")
    p.add_argument("--alpha", type=float, default=mgl.DEFAULT_ALPHA)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_mgl_train)

    p = sub.add_parser("mgl-predict", help="predict suffixes with a rule model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_mgl_predict)

    p = sub.add_parser("gcm-train", help="build the exemplar model")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--mode", choices=("type", "token"), default="type")
    p.add_argument("--sensitivity", type=float, default=None)
    p.add_argument("--fit", action="store_true", help="fit sensitivity by leave-one-out")
    p.add_argument("--fit-sample", dest="fit_sample", type=int, default=1200)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_gcm_train)

    p = sub.add_parser("gcm-predict", help="predict suffixes with an exemplar model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sensitivity", type=float, default=None)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_gcm_predict)

    p = sub.add_parser("parse", help="affix-stripping morphological parse")
    p.add_argument("words", nargs="*")
    p.add_argument("--in", dest="infile")
    p.add_argument("--max-depth", dest="max_depth", type=int, default=3)
    p.add_argument("--out")
    common(p)
    p.set_defaults(func=cmd_parse)

    def eval_flags(p):
        p.add_argument("--lexicon", required=False)
        p.add_argument("--probes")
        p.add_argument("--nonce-probes", dest="nonce_probes")
        p.add_argument("--preferences")
        p.add_argument("--annotations")
        p.add_argument("--vocab")
        p.add_argument("--alpha", type=float, default=mgl.DEFAULT_ALPHA)
        p.add_argument("--sensitivity-type", dest="sensitivity_type",
                       type=float, default=gcm.DEFAULT_SENSITIVITY_TYPE)
        p.add_argument("--sensitivity-token", dest="sensitivity_token",
                       type=float, default=gcm.DEFAULT_SENSITIVITY_TOKEN)
        p.add_argument("--out", required=True)
        common(p)

    p = sub.add_parser("eval", help="run analyses over probe/annotation inputs")
    eval_flags(p)
    p.set_defaults(func=cmd_eval, require_lexicon=True)

    p = sub.add_parser("report", help="full report from the bundled fixtures")
    eval_flags(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        info = {"version": __version__, "data_digests": _fixture_digests()}
        print(json.dumps(info, indent=1, sort_keys=True))
        return 0
    if not args.subcommand:
        parser.print_help()
        return 1
    try:
        args = _apply_config_file(args, parser)
        if args.subcommand == "eval" and not args.lexicon:
            raise InputError("eval requires --lexicon")
        return args.func(args)
    except InputError as exc:
        return _fail(str(exc), 1)
    except ItynessError as exc:
        return _fail(str(exc), 1)
    except OSError as exc:
        return _fail(str(exc), 1)
    except Exception as exc:  # internal error
        sys.stderr.write(json.dumps({"error": f"internal: {exc}"}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
