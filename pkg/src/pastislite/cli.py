"""Command-line front end: search, cost, and validate subcommands.

Long-form flags only. A --config JSON file can supply any flag value;
explicit command-line flags win. The effective configuration can be
dumped back out with --dump-config and re-fed via --config.
"""

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .balance import SCHEME_INDEX, SCHEME_TRIANGULARITY
from .costmodel import CostParams, blocked_summa_cost, plain_summa_cost
from .align import AlignParams
from .kmer import KmerParams
from .oracle import brute_force_edge_lines
from .pipeline import PipelineConfig, run_search
from .seqio import canonicalize_output, read_fasta, write_fasta
from .summa import BlockingFactor
from .synth import synthetic_records

WORKERS_ENV = "PASTISLITE_WORKERS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_MISMATCH = 3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems as CliError (exit code 1)."""

    def error(self, message):
        raise CliError(message)


_BALANCE_ALIASES = {
    "index": SCHEME_INDEX,
    "triangular": SCHEME_TRIANGULARITY,
    "triangularity": SCHEME_TRIANGULARITY,
}

# flag name (underscored) -> default; the single source of defaults used
# for config-file merging and --dump-config.
SEARCH_DEFAULTS = {
    "input": None,
    "output": None,
    "kmer_length": 6,
    "common_kmer_threshold": 2,
    "gap_open": 11,
    "gap_extend": 2,
    "ani": 0.30,
    "coverage": 0.70,
    "block_rows": 1,
    "block_cols": 1,
    "balance": "index",
    "pre_blocking": "off",
    "workers": 1,
    "lookahead": 1,
    "align_lanes": 1,
    "sparse_lanes": 1,
    "align_engine": "auto",
}


def _add_search_flags(p: _Parser) -> None:
    p.add_argument("--input", help="FASTA input path")
    p.add_argument("--output", help="triplet output path")
    p.add_argument("--kmer-length", type=int, dest="kmer_length")
    p.add_argument("--common-kmer-threshold", type=int, dest="common_kmer_threshold")
    p.add_argument("--gap-open", type=int, dest="gap_open")
    p.add_argument("--gap-extend", type=int, dest="gap_extend")
    p.add_argument("--ani", type=float, help="minimum identity in [0,1]")
    p.add_argument("--coverage", type=float, help="minimum per-sequence coverage in [0,1]")
    p.add_argument("--block-rows", type=int, dest="block_rows")
    p.add_argument("--block-cols", type=int, dest="block_cols")
    p.add_argument("--balance", choices=sorted(_BALANCE_ALIASES))
    p.add_argument("--pre-blocking", choices=["on", "off"], dest="pre_blocking")
    p.add_argument("--workers", type=int, help=f"perfect square; falls back to ${WORKERS_ENV}")
    p.add_argument("--lookahead", type=int)
    p.add_argument("--align-lanes", type=int, dest="align_lanes")
    p.add_argument("--sparse-lanes", type=int, dest="sparse_lanes")
    p.add_argument("--align-engine", choices=["auto", "inline", "pool"], dest="align_engine")
    p.add_argument("--config", help="JSON file supplying any of the flags above")
    p.add_argument("--dump-config", dest="dump_config", help="write the effective configuration as JSON")


def build_parser() -> _Parser:
    parser = _Parser(prog="pastislite", description=__doc__)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p_search = sub.add_parser("search", help="run the similarity search", parser_class=_Parser)
    _add_search_flags(p_search)
    p_search.set_defaults(func=cmd_search)

    p_cost = sub.add_parser("cost", help="communication-cost model", parser_class=_Parser)
    p_cost.add_argument("--alpha", type=float, required=True, help="message startup seconds")
    p_cost.add_argument("--beta", type=float, required=True, help="per-word transfer seconds")
    p_cost.add_argument("--submatrix-nnz", type=float, required=True, dest="submatrix_nnz",
                        help="nonzeros per sub-matrix (the model's s)")
    p_cost.add_argument("--workers", type=int, required=True)
    p_cost.add_argument("--block-rows", type=int, default=1, dest="block_rows")
    p_cost.add_argument("--block-cols", type=int, default=1, dest="block_cols")
    p_cost.add_argument("--word-bytes", type=int, default=8, dest="word_bytes")
    p_cost.set_defaults(func=cmd_cost)

    p_val = sub.add_parser("validate", help="diff a run against the brute-force reference",
                           parser_class=_Parser)
    _add_search_flags(p_val)
    p_val.add_argument("--synthetic-count", type=int, dest="synthetic_count",
                       help="generate this many synthetic records instead of --input")
    p_val.add_argument("--seed", type=int, default=0, help="seed for synthetic records")
    p_val.add_argument("--min-len", type=int, default=50, dest="min_len")
    p_val.add_argument("--max-len", type=int, default=200, dest="max_len")
    p_val.add_argument("--sweep", action="store_true",
                       help="check every (workers, blocking, scheme, pre-blocking) combination")
    p_val.set_defaults(func=cmd_validate)

    return parser


def _effective_config(args) -> dict:
    file_values = {}
    if getattr(args, "config", None):
        try:
            file_values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read --config {args.config}: {exc}")
        unknown = set(file_values) - set(SEARCH_DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")

    effective = {}
    for key, default in SEARCH_DEFAULTS.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            effective[key] = cli_value
        elif key in file_values:
            effective[key] = file_values[key]
        elif key == "workers" and os.environ.get(WORKERS_ENV):
            try:
                effective[key] = int(os.environ[WORKERS_ENV])
            except ValueError:
                raise CliError(f"${WORKERS_ENV} is not an integer")
        else:
            effective[key] = default
    if effective["balance"] not in _BALANCE_ALIASES:
        raise CliError(f"unknown balance scheme {effective['balance']!r}")
    effective["balance"] = _BALANCE_ALIASES[effective["balance"]]
    if effective["pre_blocking"] not in ("on", "off"):
        raise CliError("pre_blocking must be 'on' or 'off'")
    return effective


def _pipeline_config(effective: dict) -> PipelineConfig:
    try:
        return PipelineConfig(
            kmer=KmerParams(
                k=effective["kmer_length"],
                min_shared_kmers=effective["common_kmer_threshold"],
            ),
            align=AlignParams(
                gap_open=effective["gap_open"],
                gap_extend=effective["gap_extend"],
                min_identity=effective["ani"],
                min_coverage=effective["coverage"],
            ),
            blocking=BlockingFactor(effective["block_rows"], effective["block_cols"]),
            scheme=effective["balance"],
            workers=effective["workers"],
            pre_blocking=effective["pre_blocking"] == "on",
            lookahead=effective["lookahead"],
            align_lanes=effective["align_lanes"],
            sparse_lanes=effective["sparse_lanes"],
            align_engine=effective["align_engine"],
        )
    except ValueError as exc:
        raise CliError(str(exc))


def _maybe_dump(args, effective: dict) -> None:
    if getattr(args, "dump_config", None):
        Path(args.dump_config).write_text(json.dumps(effective, indent=2) + "\n")


def cmd_search(args) -> int:
    effective = _effective_config(args)
    if not effective["input"] or not effective["output"]:
        raise CliError("search needs --input and --output")
    config = _pipeline_config(effective)
    _maybe_dump(args, effective)
    stats = run_search(config, effective["input"], effective["output"])
    stats_path = str(effective["output"]) + ".stats.json"
    Path(stats_path).write_text(json.dumps(stats.to_json(), indent=2) + "\n")
    return EXIT_OK


def cmd_cost(args) -> int:
    try:
        cp = CostParams(
            alpha=args.alpha,
            beta=args.beta,
            submatrix_nnz=args.submatrix_nnz,
            workers=args.workers,
            word_bytes=args.word_bytes,
        )
        bf = BlockingFactor(args.block_rows, args.block_cols)
    except ValueError as exc:
        raise CliError(str(exc))
    out = {
        "plain": plain_summa_cost(cp).to_json(),
        "blocked": blocked_summa_cost(cp, bf).to_json(),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _validate_records(args, effective):
    if effective["input"]:
        records = read_fasta(effective["input"])
    elif args.synthetic_count:
        records = synthetic_records(
            args.synthetic_count, args.seed, min_len=args.min_len, max_len=args.max_len
        )
    else:
        raise CliError("validate needs --input or --synthetic-count")
    if len(records) > 500:
        raise CliError("validate is quadratic; supply at most 500 records")
    return records


def _run_and_canonicalize(config, fasta_path, workdir) -> list[str]:
    out = Path(workdir) / "edges.tsv"
    canon = Path(workdir) / "edges.canonical.tsv"
    run_search(config, fasta_path, out)
    canonicalize_output(out, canon)
    return canon.read_text().splitlines()


def _report_divergence(got: list[str], want: list[str]) -> None:
    for idx, (g, w) in enumerate(zip(got, want)):
        if g != w:
            print(f"first divergence at line {idx + 1}:")
            print(f"  pipeline:  {g}")
            print(f"  reference: {w}")
            return
    shorter, longer, who = (
        (got, want, "reference") if len(got) < len(want) else (want, got, "pipeline")
    )
    print(f"first divergence at line {len(shorter) + 1}: extra {who} line:")
    print(f"  {longer[len(shorter)]}")


def cmd_validate(args) -> int:
    effective = _effective_config(args)
    records = _validate_records(args, effective)
    _maybe_dump(args, effective)
    reference = brute_force_edge_lines(
        records,
        KmerParams(
            k=effective["kmer_length"],
            min_shared_kmers=effective["common_kmer_threshold"],
        ),
        AlignParams(
            gap_open=effective["gap_open"],
            gap_extend=effective["gap_extend"],
            min_identity=effective["ani"],
            min_coverage=effective["coverage"],
        ),
    )
    with tempfile.TemporaryDirectory(prefix="pastislite-validate-") as workdir:
        fasta = Path(workdir) / "input.fa"
        write_fasta(fasta, records)
        if not args.sweep:
            config = _pipeline_config(effective)
            got = _run_and_canonicalize(config, fasta, workdir)
            if got == reference:
                print(f"OK: {len(got)} edges match the brute-force reference")
                return EXIT_OK
            _report_divergence(got, reference)
            return EXIT_MISMATCH

        failures = 0
        for workers in (1, 4, 9):
            for blocking in (1, 2, 4):
                for scheme in (SCHEME_INDEX, SCHEME_TRIANGULARITY):
                    for pre in ("off", "on"):
                        combo = dict(
                            effective,
                            workers=workers,
                            block_rows=blocking,
                            block_cols=blocking,
                            balance=scheme,
                            pre_blocking=pre,
                        )
                        config = _pipeline_config(combo)
                        got = _run_and_canonicalize(config, fasta, workdir)
                        ok = got == reference
                        failures += not ok
                        print(
                            f"{'PASS' if ok else 'FAIL'} workers={workers} "
                            f"blocking={blocking}x{blocking} scheme={scheme} "
                            f"pre_blocking={pre} edges={len(got)}"
                        )
        if failures:
            print(f"{failures} configurations diverged")
            return EXIT_MISMATCH
        print("all configurations match the brute-force reference")
        return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING
    )
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
