"""Command-line front door.

Subcommands: train-lm, build-trie, simulate, decode, evaluate, ablate,
serve. Every command is deterministic given its flags plus --seed; all
randomness flows from that one seed. A config file (lines of `key = value`
matching long flag names, # comments allowed) supplies defaults that
explicit flags override.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bundle import build_models, load_phrases, vocabulary_from_lines
from .decoder import DecoderConfig, beam_decode, greedy_decode
from .keyboard import CHAR_VOCAB, KeyboardLayout, KeyTouchModel, default_layout, fit_key_models
from .lexicon import Trie, load_vocabulary
from .metrics import (align_events, cher, classification_scores, coer,
                      format_table, nll_report, temporal_offset)
from .ngram import load_arpa, save_arpa, train, train_char_lm, train_word_lm
from .simulator import FINGER_ERROR_TARGETS_MM, NoiseProfile, calibrate_sensing, simulate
from .streams import read_observations, read_truth, write_observations, write_truth

DECODED_SCHEMA = "touchdecode-decoded/1"


class CliError(Exception):
    pass


def _read_config(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _load_layout(path) -> KeyboardLayout:
    return KeyboardLayout.load(path) if path else default_layout()


def _load_keys(path, layout) -> KeyTouchModel:
    return KeyTouchModel.load(path) if path else fit_key_models(layout, [])


def _load_profile(path) -> NoiseProfile:
    if not path:
        return NoiseProfile()
    with open(path, encoding="utf-8") as f:
        return NoiseProfile.from_json(json.load(f))


def _models_for_decode(args):
    layout = _load_layout(args.layout)
    keys = _load_keys(args.keys, layout)
    if args.char_lm or args.word_lm or args.vocab:
        if not (args.char_lm and args.word_lm and args.vocab):
            raise CliError("--char-lm, --word-lm and --vocab must be given together")
        char_lm = load_arpa(args.char_lm)
        word_lm = load_arpa(args.word_lm)
        alphabet = {k.id for k in layout.keys} - {" "}
        trie = Trie.build(load_vocabulary(args.vocab), alphabet=alphabet)
        from .bundle import ModelBundle
        return ModelBundle(layout=layout, keys=keys, char_lm=char_lm,
                           word_lm=word_lm, trie=trie)
    corpus = load_phrases(args.corpus) if args.corpus else None
    return build_models(corpus_lines=corpus, layout=layout, keys=keys)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_train_lm(args) -> int:
    lines = load_phrases(args.input)
    if args.kind == "char":
        model = train_char_lm(lines, order=args.order)
    elif args.kind == "word":
        model = train_word_lm(lines, order=args.order, vocab_size=args.vocab_size)
    else:
        tokenized = [line.split() for line in lines]
        model = train(tokenized, order=args.order)
    save_arpa(model, args.out)
    n_grams = len(model.probs)
    print(f"wrote {args.kind} {args.order}-gram model with {n_grams} entries to {args.out}")
    return 0


def cmd_build_trie(args) -> int:
    words = load_vocabulary(args.vocab)
    alphabet = set(CHAR_VOCAB) - {" "}
    trie = Trie.build(words, alphabet=alphabet)
    kept = sorted(set(words) - set(trie.rejected))
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("\n".join(kept) + "\n")
    print(f"wrote {trie.word_count} words to {args.out}"
          + (f" ({len(trie.rejected)} rejected: {', '.join(trie.rejected[:5])}"
             + ("..." if len(trie.rejected) > 5 else "") + ")"
             if trie.rejected else ""))
    return 0


def cmd_simulate(args) -> int:
    phrases = load_phrases(args.phrases)
    if args.limit:
        phrases = phrases[:args.limit]
    layout = _load_layout(args.layout)
    keys = _load_keys(args.keys, layout)
    profile = _load_profile(args.noise_profile)
    truths, streams = [], []
    for i, phrase in enumerate(phrases):
        truth, obs = simulate(phrase, layout, keys, profile, seed=args.seed + i)
        truths.append(truth)
        streams.append(obs)
    write_observations(args.out, streams)
    write_truth(args.truth, truths)
    n_obs = sum(len(s) for s in streams)
    print(f"simulated {len(phrases)} phrases -> {n_obs} observations "
          f"({args.out}, {args.truth})")
    return 0


def cmd_decode(args) -> int:
    bundle = _models_for_decode(args)
    cfg = DecoderConfig(beam_width=args.beam_width,
                        lambda_omission=args.lambda_omission,
                        lambda_insertion=args.lambda_insertion,
                        uncertainty_enabled=(args.uncertainty == "on"))
    streams = read_observations(args.stream)
    results = []
    for i, stream in enumerate(streams):
        if args.mode == "greedy":
            text = greedy_decode(stream, bundle.keys, bundle.char_lm, cfg)
            results.append({"phrase": i, "text": text})
        else:
            ranked = beam_decode(stream, bundle.keys, bundle.char_lm,
                                 bundle.word_lm, bundle.trie, cfg)
            top = ranked[0] if ranked else ("", float("-inf"))
            results.append({
                "phrase": i, "text": top[0], "score": top[1],
                "alternatives": [{"text": t, "score": s} for t, s in ranked[:5]],
            })
    payload = {"schema": DECODED_SCHEMA, "mode": args.mode, "results": results}
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")
    print(f"decoded {len(results)} streams ({args.mode}) -> {args.out}")
    return 0


def _load_decoded(path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("schema") != DECODED_SCHEMA:
        raise CliError(f"{path}: expected schema {DECODED_SCHEMA!r}")
    results = sorted(payload["results"], key=lambda r: r["phrase"])
    return [r["text"] for r in results]


def cmd_evaluate(args) -> int:
    streams = read_observations(args.stream)
    truths = read_truth(args.truth)
    decoded = _load_decoded(args.decoded)
    if not (len(streams) == len(truths) == len(decoded)):
        raise CliError(
            f"phrase count mismatch: {len(streams)} streams, "
            f"{len(truths)} truths, {len(decoded)} decoded")
    layout = _load_layout(args.layout)

    chers, coers, nlls, offsets = [], [], [], []
    matched = missed = ghosts = fcorrect = fwrong = 0
    for stream, truth, text in zip(streams, truths, decoded):
        target = "".join(e.char for e in truth)
        c = cher(text, target)
        if c is not None:
            chers.append(c)
        co = coer(stream, truth, layout)
        if co is not None:
            coers.append(co)
        nll = nll_report(stream, truth)
        if nll is not None:
            nlls.append(nll)
        report = align_events(stream, truth)
        off = temporal_offset(report)
        if off is not None:
            offsets.append(off)
        matched += report.matched
        missed += report.missed
        ghosts += report.ghosts
        fcorrect += report.finger_correct
        fwrong += report.finger_wrong

    pooled = align_pooled_scores(matched, missed, ghosts, fcorrect, fwrong)
    summary = {
        "phrases": len(decoded),
        "cher": _mean(chers),
        "coer": _mean(coers),
        "nll": _mean(nlls),
        "temporal_offset_ms": _mean(offsets),
        **pooled,
    }
    table = format_table([{"metric": k, "value": v} for k, v in summary.items()],
                         columns=["metric", "value"])
    print(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=1, sort_keys=True)
            f.write("\n")
        print(f"report -> {args.out}")
    return 0


def _mean(vals):
    return float(np.mean(vals)) if vals else None


def align_pooled_scores(matched, missed, ghosts, fcorrect, fwrong) -> dict:
    tp = matched / (matched + ghosts) if matched + ghosts else None
    tr = matched / (matched + missed) if matched + missed else None
    f1 = (2 * tp * tr / (tp + tr)) if tp and tr else None
    facc = fcorrect / (fcorrect + fwrong) if fcorrect + fwrong else None
    return {"touch_precision": tp, "touch_recall": tr, "touch_f1": f1,
            "finger_accuracy": facc,
            "matched": matched, "missed": missed, "ghosts": ghosts}


def cmd_ablate(args) -> int:
    phrases = load_phrases(args.phrases)
    if args.limit:
        phrases = phrases[:args.limit]
    bundle = build_models(
        corpus_lines=load_phrases(args.corpus) if args.corpus else None)
    sensing = calibrate_sensing(FINGER_ERROR_TARGETS_MM, seed=args.seed)
    profile = NoiseProfile(sensing_std=sensing)
    sims = [simulate(p, bundle.layout, bundle.keys, profile, seed=args.seed + 1 + i)
            for i, p in enumerate(phrases)]

    def run(cfg, mode):
        chers, coers = [], []
        for (truth, obs), phrase in zip(sims, phrases):
            if mode == "greedy":
                text = greedy_decode(obs, bundle.keys, bundle.char_lm, cfg)
            else:
                ranked = beam_decode(obs, bundle.keys, bundle.char_lm,
                                     bundle.word_lm, bundle.trie, cfg)
                text = ranked[0][0] if ranked else ""
            c = cher(text, phrase)
            if c is not None:
                chers.append(c)
            co = coer(obs, truth, bundle.layout)
            if co is not None:
                coers.append(co)
        return {"cher": _mean(chers), "coer": _mean(coers)}

    rows = []
    if args.sweep == "uncertainty":
        for mode in ("greedy", "beam"):
            for unc in (True, False):
                cfg = DecoderConfig(uncertainty_enabled=unc)
                rows.append({"mode": mode,
                             "uncertainty": "on" if unc else "off",
                             **run(cfg, mode)})
    elif args.sweep == "beta-penalties":
        for lam in (-2.0, -6.0, -10.0, -14.0):
            cfg = DecoderConfig(lambda_omission=lam, lambda_insertion=lam)
            rows.append({"mode": "beam", "penalty": lam, **run(cfg, "beam")})
    else:  # beam-width
        for width in (1, 2, 5, 10, 20, 50):
            cfg = DecoderConfig(beam_width=width)
            rows.append({"mode": "beam", "beam_width": width, **run(cfg, "beam")})

    print(format_table(rows))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump({"sweep": args.sweep, "seed": args.seed, "rows": rows},
                      f, indent=1, sort_keys=True)
            f.write("\n")
        print(f"matrix -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    corpus = load_phrases(args.corpus) if args.corpus else None
    static_dir = args.frontend if args.frontend and os.path.isdir(args.frontend) else None
    app = create_app(corpus_lines=corpus, seed=args.seed, static_dir=static_dir)
    if static_dir:
        print(f"serving playground UI from {static_dir}")
    print(f"listening on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="touchdecode",
        description="Uncertainty-aware probabilistic touch-input decoding")
    parser.add_argument("--config", help="key = value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", help="train an n-gram LM, write ARPA")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--input", required=True, help="corpus, one sentence per line")
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=["char", "word", "token"], default="char")
    p.add_argument("--vocab-size", type=int, default=100_000)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("build-trie", help="validate and canonicalize a vocabulary")
    p.add_argument("--vocab", required=True, help="word list, one per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_trie)

    p = sub.add_parser("simulate", help="synthesize observation streams")
    p.add_argument("--phrases", help="phrase file (default: bundled set)")
    p.add_argument("--layout", help="layout JSON (default: built-in QWERTY)")
    p.add_argument("--keys", help="key-model JSON (default: prior model)")
    p.add_argument("--noise-profile", help="noise profile JSON (default: calibrated)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, help="use only the first N phrases")
    p.add_argument("--out", required=True, help="observations JSONL")
    p.add_argument("--truth", required=True, help="ground-truth JSONL")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode", help="decode an observation stream file")
    p.add_argument("--stream", required=True)
    p.add_argument("--mode", choices=["greedy", "beam"], default="beam")
    p.add_argument("--uncertainty", choices=["on", "off"], default="on")
    p.add_argument("--beam-width", type=int, default=20)
    p.add_argument("--lambda-omission", type=float, default=-10.0)
    p.add_argument("--lambda-insertion", type=float, default=-10.0)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus", help="train models from this corpus")
    p.add_argument("--layout")
    p.add_argument("--keys")
    p.add_argument("--char-lm", help="ARPA file (with --word-lm and --vocab)")
    p.add_argument("--word-lm")
    p.add_argument("--vocab")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("evaluate", help="metrics for decoded output vs truth")
    p.add_argument("--stream", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--decoded", required=True)
    p.add_argument("--layout")
    p.add_argument("--out", help="write metrics JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="seeded condition sweeps")
    p.add_argument("--sweep", choices=["uncertainty", "beta-penalties", "beam-width"],
                   required=True)
    p.add_argument("--phrases")
    p.add_argument("--corpus")
    p.add_argument("--limit", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("serve", help="run the playground service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpus")
    p.add_argument("--frontend", default="frontend/dist",
                   help="static UI directory (mounted at /)")
    p.set_defaults(func=cmd_serve)
    return parser


def _extract_config_path(argv) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config":
            if i + 1 >= len(argv):
                raise CliError("--config requires a path")
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        config_path = _extract_config_path(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if config_path:
        try:
            overrides = _read_config(config_path)
        except (OSError, CliError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for subparser in parser._subparsers._group_actions[0].choices.values():
            defaults = {}
            for action in subparser._actions:
                if action.dest in overrides:
                    raw = overrides[action.dest]
                    defaults[action.dest] = action.type(raw) if action.type else raw
                    action.required = False  # the config now supplies it
            subparser.set_defaults(**defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
