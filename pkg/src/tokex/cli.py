"""The tokex command line: every pipeline behind one entry point.

Subcommands write machine-readable output only (JSON, or CSV for sweep) to
stdout or --out; diagnostics go to stderr. Exit codes: 0 success, 1
validation or usage error, 2 I/O error, 3 internal error. All outputs are
byte-deterministic given identical inputs and flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import __version__
from .adoption import NGramOracle, adoption_scan
from .bytemap import parse_token, render_token
from .core import load_tokenizer, save_tokenizer
from .corpus import Corpus
from .cost_model import ModelGeometry, net_gain
from .errors import InternalError, TokexError, ValidationError
from .evaluator import AVERAGING_NOTE, FertilityReport, fertility, sweep
from .extender import (
    ExtensionConfig,
    Strategy,
    extend,
    frequency_sorted_candidates,
    verify_monotonic,
)
from .embeddings import init_new_embeddings, load_embeddings, save_embeddings
from .trainer import TrainingConfig, train


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's default 2
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("TOKEX_THREADS")
    if env and env.isdigit() and int(env) > 0:
        return int(env)
    return os.cpu_count() or 1


def _emit(payload, out_path: str | None, compact: bool = False) -> None:
    if compact:
        text = json.dumps(payload, ensure_ascii=False, separators=(",", ":"))
    else:
        text = json.dumps(payload, ensure_ascii=False, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load_freqs(path) -> dict[bytes, int]:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: frequency file must be a JSON object")
    freqs: dict[bytes, int] = {}
    for rendered, count in raw.items():
        if isinstance(count, bool) or not isinstance(count, int) or count < 0:
            raise ValidationError(
                f"{path}: count for {rendered!r} must be a non-negative integer"
            )
        freqs[parse_token(rendered)] = count
    return freqs


def _fertility_payload(report: FertilityReport) -> dict:
    payload = asdict(report)
    payload["averaging"] = AVERAGING_NOTE
    return payload


# ---------------------------------------------------------------- subcommands


def _cmd_train(args) -> None:
    corpus = Corpus.from_path(args.corpus)
    result = train(
        corpus,
        TrainingConfig(
            target_vocab_size=args.vocab_size,
            min_pair_frequency=args.min_pair_freq,
        ),
    )
    save_tokenizer(result.tokenizer, args.out)
    if args.freqs:
        ordered = sorted(
            result.frequencies.items(), key=lambda kv: result.tokenizer.vocab[kv[0]]
        )
        _emit({render_token(t): c for t, c in ordered}, args.freqs)
    if not result.target_reached:
        print(
            f"warning: stopped at vocab size {result.tokenizer.vocab_size} "
            f"(target {args.vocab_size})",
            file=sys.stderr,
        )
    _emit(
        {
            "vocab_size": result.tokenizer.vocab_size,
            "num_merges": len(result.tokenizer.merges),
            "target_reached": result.target_reached,
            "out": args.out,
        },
        None,
    )


def _cmd_extend(args) -> None:
    base = load_tokenizer(args.base)
    domain = load_tokenizer(args.domain_tok)
    freqs = _load_freqs(args.domain_freqs)
    candidates = frequency_sorted_candidates(domain.vocab, freqs)
    strategy = Strategy.APPEND if args.strategy == "append" else Strategy.PREPEND_BASELINE
    ext, report = extend(base, candidates, ExtensionConfig(args.num_tokens, strategy))
    save_tokenizer(ext, args.out)
    if args.report:
        _emit(
            {
                "requested": report.requested,
                "achieved": report.achieved,
                "strategy": report.strategy.value,
                "added": [
                    {
                        "token": render_token(a.token),
                        "id": a.token_id,
                        "merge": list(a.merge.render().split(" ")) if a.merge else None,
                    }
                    for a in report.added
                ],
                "skipped": [
                    {"token": render_token(s.token), "reason": s.reason.value}
                    for s in report.skipped
                ],
            },
            args.report,
        )
    _emit(
        {
            "requested": report.requested,
            "achieved": report.achieved,
            "strategy": report.strategy.value,
            "skip_counts": report.skip_counts(),
            "out": args.out,
        },
        None,
    )


def _cmd_encode(args) -> None:
    tok = load_tokenizer(args.tokenizer)
    if args.input is not None:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = args.text
    _emit({"ids": tok.encode(text)}, args.out, compact=True)


def _cmd_decode(args) -> None:
    tok = load_tokenizer(args.tokenizer)
    ids = [int(part) for part in args.ids.split(",") if part.strip() != ""]
    decoded = tok.decode(ids)
    if isinstance(decoded, str):
        _emit({"text": decoded}, args.out, compact=True)
    else:
        _emit({"bytes_hex": decoded.hex()}, args.out, compact=True)


def _cmd_fertility(args) -> None:
    tok = load_tokenizer(args.tokenizer)
    corpus = Corpus.from_path(args.corpus)
    report = fertility(
        tok,
        corpus,
        corpus_id=args.corpus_id or args.corpus,
        tokenizer_id=args.tokenizer_id or args.tokenizer,
    )
    _emit(_fertility_payload(report), args.out)


def _parse_named_corpus(named: str) -> tuple[str, Corpus]:
    name, sep, path = named.partition("=")
    if not sep or not name or not path:
        raise ValidationError(f"--corpus expects NAME=PATH, got {named!r}")
    return name, Corpus.from_path(path)


def _cmd_sweep(args) -> None:
    base = load_tokenizer(args.base)
    domain = load_tokenizer(args.domain_tok)
    freqs = _load_freqs(args.domain_freqs)
    candidates = frequency_sorted_candidates(domain.vocab, freqs)
    corpora = dict(_parse_named_corpus(named) for named in args.corpus)
    steps = [int(s) for s in args.steps.split(",") if s.strip() != ""]
    strategies = []
    for name in args.strategies.split(","):
        name = name.strip()
        if name == "append":
            strategies.append(Strategy.APPEND)
        elif name == "prepend":
            strategies.append(Strategy.PREPEND_BASELINE)
        elif name:
            raise ValidationError(f"unknown strategy {name!r}")
    result = sweep(base, candidates, corpora, steps, strategies)
    csv_text = result.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)


def _cmd_init_embeddings(args) -> None:
    if (args.base_proj is None) != (args.out_proj is None):
        raise ValidationError("--base-proj and --out-proj must be given together")
    base = load_tokenizer(args.base_tok)
    ext = load_tokenizer(args.ext_tok)
    emb = load_embeddings(args.base_emb)
    out = init_new_embeddings(base, ext, emb)
    save_embeddings(out, args.out_emb)
    summary = {
        "rows": out.rows,
        "dims": out.dims,
        "new_rows": out.rows - emb.rows,
        "out_emb": args.out_emb,
    }
    if args.base_proj:
        proj = load_embeddings(args.base_proj)
        out_proj = init_new_embeddings(base, ext, proj)
        save_embeddings(out_proj, args.out_proj)
        summary["out_proj"] = args.out_proj
    _emit(summary, None)


def _cmd_costmodel(args) -> None:
    geom = ModelGeometry(
        hidden_size=args.hidden,
        num_layers=args.layers,
        base_vocab=args.vocab,
        ffn_mult=args.ffn_mult,
    )
    fert = None
    if args.fertility:
        with open(args.fertility, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            fert = FertilityReport(
                **{k: raw[k] for k in FertilityReport.__dataclass_fields__}
            )
        except KeyError as exc:
            raise ValidationError(
                f"{args.fertility}: missing fertility field {exc.args[0]!r}"
            ) from None
    estimate = net_gain(
        geom,
        delta_vocab=args.delta_vocab,
        token_reduction=args.token_reduction,
        words=args.words,
        tokens_per_word=args.tokens_per_word,
        fertility_report=fert,
    )
    payload = asdict(estimate)
    payload["geometry"] = asdict(geom)
    payload["delta_vocab"] = args.delta_vocab
    payload["words"] = args.words
    payload["assumptions"] = (
        "latency proportional to FLOPs; per token per layer: 8*h^2 attention "
        "projections + 6*ffn_mult*h^2 gated FFN + 2*h*seq_len causal "
        "attention; plus 2*h*vocab logits per token"
    )
    _emit(payload, args.out)


def _cmd_adoption(args) -> None:
    ext = load_tokenizer(args.ext_tok)
    base = load_tokenizer(args.base_tok)
    if args.oracle != "ngram":
        raise ValidationError(f"unknown oracle {args.oracle!r} (available: ngram)")
    if not args.oracle_train:
        raise ValidationError("--oracle-train is required for the ngram oracle")
    train_corpus = Corpus.from_path(args.oracle_train)
    oracle = NGramOracle(
        vocab_size=ext.vocab_size, order=args.ngram_order, alpha=args.alpha
    ).fit(ext.encode(doc) for doc in train_corpus.documents)
    corpus = Corpus.from_path(args.corpus)
    bounds = [int(b) for b in args.buckets.split(",") if b.strip() != ""]
    report = adoption_scan(
        oracle,
        ext,
        base,
        corpus,
        bucket_bounds=bounds,
        collect_decisions=args.dump_decisions,
        threads=_threads(args),
    )
    payload = {
        "buckets": [
            {
                "min_words": b.min_words,
                "max_words": b.max_words,
                "n_evaluated": b.n_evaluated,
                "n_new": b.n_new,
                "n_old": b.n_old,
                "new_preferred_fraction": b.new_preferred_fraction,
            }
            for b in report.buckets
        ],
        "total_evaluated": report.total_evaluated,
        "total_identical": report.total_identical,
        "scoring": report.scoring,
        "oracle": {
            "kind": "ngram",
            "order": args.ngram_order,
            "alpha": args.alpha,
            "train_corpus": args.oracle_train,
        },
    }
    if args.dump_decisions:
        payload["decisions"] = [
            {
                "doc_index": d.doc_index,
                "word": d.word,
                "preference": d.preference.value,
                "new_len": d.new_len,
                "old_len": d.old_len,
                "new_log_prob": d.new_log_prob,
                "old_log_prob": d.old_log_prob,
            }
            for d in report.decisions or []
        ]
    _emit(payload, args.out)


def _cmd_verify(args) -> None:
    base = load_tokenizer(args.base)
    ext = load_tokenizer(args.ext)
    corpus = Corpus.from_path(args.corpus)
    report = verify_monotonic(base, ext, corpus, threads=_threads(args))
    _emit(
        {
            "checked": report.checked,
            "ok": report.ok,
            "violations": [
                {"text": v.text, "base_len": v.base_len, "ext_len": v.ext_len}
                for v in report.violations
            ],
        },
        args.out,
    )


# -------------------------------------------------------------------- parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="tokex", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tokex {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("train", help="train a BPE tokenizer on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--min-pair-freq", type=int, default=2)
    p.add_argument("--out", required=True)
    p.add_argument("--freqs", help="also write the token frequency table")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("extend", help="extend a base tokenizer with domain tokens")
    p.add_argument("--base", required=True)
    p.add_argument("--domain-tok", required=True)
    p.add_argument("--domain-freqs", required=True)
    p.add_argument("--num-tokens", type=int, required=True)
    p.add_argument("--strategy", choices=["append", "prepend"], default="append")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the per-candidate audit report")
    p.set_defaults(func=_cmd_extend)

    p = sub.add_parser("encode", help="encode text to token ids")
    p.add_argument("--tokenizer", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--input", help="read the text from a file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="decode comma-separated token ids")
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--ids", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("fertility", help="measure tokens per document and word")
    p.add_argument("--tokenizer", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--corpus-id")
    p.add_argument("--tokenizer-id")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fertility)

    p = sub.add_parser("sweep", help="fertility across extension sizes")
    p.add_argument("--base", required=True)
    p.add_argument("--domain-tok", required=True)
    p.add_argument("--domain-freqs", required=True)
    p.add_argument(
        "--corpus", action="append", required=True, metavar="NAME=PATH"
    )
    p.add_argument("--steps", required=True, help="comma-separated token counts")
    p.add_argument("--strategies", default="append")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("init-embeddings", help="average-initialize new rows")
    p.add_argument("--base-tok", required=True)
    p.add_argument("--ext-tok", required=True)
    p.add_argument("--base-emb", required=True)
    p.add_argument("--base-proj")
    p.add_argument("--out-emb", required=True)
    p.add_argument("--out-proj")
    p.set_defaults(func=_cmd_init_embeddings)

    p = sub.add_parser("costmodel", help="analytical throughput estimate")
    p.add_argument("--hidden", type=int, required=True)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--vocab", type=int, required=True)
    p.add_argument("--delta-vocab", type=int, required=True)
    p.add_argument("--words", type=int, required=True)
    p.add_argument("--token-reduction", type=float, required=True)
    p.add_argument("--ffn-mult", type=float, default=3.5)
    p.add_argument("--tokens-per-word", type=float, default=None)
    p.add_argument("--fertility", help="fertility report JSON for tokens per word")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_costmodel)

    p = sub.add_parser("adoption", help="how often an oracle prefers new tokens")
    p.add_argument("--ext-tok", required=True)
    p.add_argument("--base-tok", required=True)
    p.add_argument("--oracle", default="ngram")
    p.add_argument("--oracle-train", help="corpus to fit the ngram oracle on")
    p.add_argument("--ngram-order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--corpus", required=True)
    p.add_argument("--buckets", default="15,50")
    p.add_argument("--dump-decisions", action="store_true")
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_adoption)

    p = sub.add_parser("verify", help="check the never-worse guarantee on samples")
    p.add_argument("--base", required=True)
    p.add_argument("--ext", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.error("a subcommand is required")
        args.func(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except TokexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
