#
# Copyright (C) 2026 The pbsdup Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Command line client: encode locally, submit sequences, render reports.

Plaintext never leaves the machine. Only the FASTA sidecars written by
`pbsdup encode` are uploaded, and reports are rendered from the local source
and offset map.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import os
from pathlib import Path
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence
import zipfile

from pbsdup import archive, config, paths, service
from pbsdup import eval as pbs_eval
from pbsdup.bundle import RESULT_SUFFIX, LocalBundle, encode_task
from pbsdup.client import ServiceClient
from pbsdup.config import Settings
from pbsdup.corpus import CorpusDb, ingest, read_manifest_documents
from pbsdup.detector import report_from_metadata
from pbsdup.encoder import Alphabet
from pbsdup.errors import (
    EncodingError,
    ManifestError,
    MapMismatchError,
    NetworkError,
    PbsError,
    ServerError,
    SourceChangedError,
)
from pbsdup.printers import StdoutPrinter
from pbsdup.render import render_report
from pbsdup.timer import Timer
from pbsdup.workqueue import TaskError, run_ordered


EXIT_OK = 0
EXIT_UNREADABLE = 1
EXIT_ENCODING = 2
EXIT_NETWORK = 3
EXIT_SERVER = 4
EXIT_MAP_MISMATCH = 5
EXIT_SOURCE_CHANGED = 6
EXIT_MANIFEST = 7

DEFAULT_CONFIG = Path("pbsdup.json")
BUNDLE_ZIP = "bundle"

Command = Callable[[argparse.Namespace, Settings], int]


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


def exit_code_for(ex: BaseException) -> int:
    """The documented exit status for an error."""
    if isinstance(ex, TaskError) and ex.__cause__ is not None:
        return exit_code_for(ex.__cause__)
    if isinstance(ex, SourceChangedError):
        return EXIT_SOURCE_CHANGED
    if isinstance(ex, MapMismatchError):
        return EXIT_MAP_MISMATCH
    if isinstance(ex, ManifestError):
        return EXIT_MANIFEST
    if isinstance(ex, NetworkError):
        return EXIT_NETWORK
    if isinstance(ex, ServerError):
        return EXIT_SERVER
    if isinstance(ex, EncodingError):
        return EXIT_ENCODING
    return EXIT_UNREADABLE


def make_client(settings: Settings) -> ServiceClient:
    return ServiceClient(settings.server)


def _input_files(inputs: Sequence[Path]) -> List[Path]:
    """Expands directories and unpacks zips next to themselves."""
    files: List[Path] = []
    for path in inputs:
        if path.suffix == ".zip":
            dest = path.with_suffix("")
            dest.mkdir(exist_ok=True)
            archive.unzip(path, dest)
            files.extend(paths.text_files(dest))
        else:
            files.extend(paths.text_files(path))
    return files


def _zip_fastas(fastas: Sequence[Path], out: Path) -> Path:
    root = Path(os.path.commonpath([f.parent for f in fastas]))
    members = [str(f.relative_to(root)) for f in fastas]
    return archive.make_zip(out.with_suffix(""), root, members)


def cmd_encode(args: argparse.Namespace, settings: Settings) -> int:
    sources = _input_files(args.paths)
    if not sources:
        print("No text files to encode.", file=sys.stderr)
        return EXIT_UNREADABLE
    tasks = [(s, settings.alphabet_size, args.keep_refs) for s in sources]
    with Timer() as timer:
        outcomes = run_ordered(encode_task, tasks, args.jobs)

    failures = [o for o in outcomes if o.error is not None]
    for outcome in failures:
        print(f"{outcome.source}: {outcome.error}", file=sys.stderr)
    bundles = [o.bundle for o in outcomes if o.bundle is not None]
    for bundle in bundles:
        print(bundle.fasta_path)
    logger().info("Encoded %d files in %s", len(bundles), timer)
    if failures:
        assert failures[0].error is not None
        return exit_code_for(failures[0].error)

    wants_zip = args.zip is not None or len(bundles) > 1
    if wants_zip:
        out = args.zip
        if out is None:
            out = bundles[0].source_path.parent / f"{BUNDLE_ZIP}.zip"
        print(_zip_fastas([b.fasta_path for b in bundles], out))
    return EXIT_OK


def _write_json(path: Path, body: Dict[str, Any]) -> None:
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", "utf-8")


def _write_results(documents: List[Dict[str, Any]], out_dir: Path) -> None:
    for metadata in documents:
        name = Path(str(metadata["queryId"])).with_suffix(RESULT_SUFFIX).name
        _write_json(out_dir / name, metadata)
        logger().info("Wrote %s", out_dir / name)
    StdoutPrinter().print_summary(report_from_metadata(m) for m in documents)


def _submit_pairwise(
    data: bytes, out_dir: Path, settings: Settings, search: bool
) -> int:
    body = make_client(settings).pairwise(data, search=search)
    _write_results(body["documents"], out_dir)
    return EXIT_OK


def cmd_submit(args: argparse.Namespace, settings: Settings) -> int:
    path: Path = args.path
    data = path.read_bytes()
    if path.suffix == ".zip":
        return _submit_pairwise(data, path.parent, settings, args.search)
    metadata = make_client(settings).search(data)
    result_path = path.with_suffix(RESULT_SUFFIX)
    _write_json(result_path, metadata)
    logger().info("Wrote %s", result_path)
    StdoutPrinter().print_summary([report_from_metadata(metadata)])
    return EXIT_OK


def cmd_pairwise_submit(args: argparse.Namespace, settings: Settings) -> int:
    inputs: List[Path] = args.paths
    if len(inputs) == 1 and inputs[0].suffix == ".zip":
        data = inputs[0].read_bytes()
    else:
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_DEFLATED) as out:
            for path in inputs:
                out.write(path, arcname=path.name)
        data = buffer.getvalue()
    return _submit_pairwise(data, inputs[0].parent, settings, args.search)


def cmd_report(args: argparse.Namespace, settings: Settings) -> int:
    bundle = LocalBundle.for_source(args.source)
    metadata_path: Path = args.metadata or bundle.result_path
    metadata = json.loads(metadata_path.read_text("utf-8"))
    print(render_report(bundle, metadata, args.out))
    return EXIT_OK


def cmd_db_build(args: argparse.Namespace, settings: Settings) -> int:
    documents = read_manifest_documents(args.manifest)
    with Timer() as timer:
        db = ingest(
            documents,
            Alphabet.for_size(settings.alphabet_size),
            settings.occ_rate,
            settings.sa_rate,
        )
    db.save(args.out)
    print(f"{args.out}: {len(db)} documents, {db.total_words} words in {timer}")
    return EXIT_OK


def cmd_db_info(args: argparse.Namespace, settings: Settings) -> int:
    db = CorpusDb.load(args.db)
    for key, value in db.stats().items():
        print(f"{key}: {value}")
    if args.verify:
        problems = db.verify()
        for problem in problems:
            print(f"problem: {problem}")
        if problems:
            return EXIT_UNREADABLE
        print("verified")
    return EXIT_OK


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as ex:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text}") from ex


def cmd_eval_fp(args: argparse.Namespace, settings: Settings) -> int:
    texts: List[bytes] = []
    for corpus in args.corpus:
        texts.extend(pbs_eval.load_corpus(corpus))
    reports = pbs_eval.sweep(
        texts, args.k, args.alphabet_sizes, args.jobs, args.memory_budget
    )
    table = pbs_eval.format_fp_table(reports)
    if args.out is not None:
        args.out.write_text(table, "utf-8")
    print(table, end="")
    return EXIT_OK


def cmd_eval_compress(args: argparse.Namespace, settings: Settings) -> int:
    corpora = {str(c): pbs_eval.load_corpus(c) for c in args.corpus}
    for language in args.synthetic:
        corpora[language] = [pbs_eval.sample_corpus(language, args.size)]
    reports = pbs_eval.compression_ratio(
        corpora, Alphabet.for_size(settings.alphabet_size), not args.no_db
    )
    print(pbs_eval.format_compression_table(reports), end="")
    return EXIT_OK


def cmd_eval_bench(args: argparse.Namespace, settings: Settings) -> int:
    report = pbs_eval.benchmark_search(
        args.genome_length,
        args.queries,
        args.query_length,
        args.naive_queries,
        args.seed,
        Alphabet.for_size(settings.alphabet_size),
    )
    print(f"genome: {report.genome_length} characters")
    print(f"index build: {report.build_seconds:.3f}s")
    print(f"queries: {report.query_count} x {report.query_length} characters")
    print(f"throughput: {report.chars_per_second:.0f} query characters/s")
    print(f"speedup over scanning: {report.speedup:.1f}x")
    return EXIT_OK


def cmd_eval_refs(args: argparse.Namespace, settings: Settings) -> int:
    report = pbs_eval.reference_filter_auc(
        documents=args.documents, seed=args.seed, calibrate=args.calibrate
    )
    print(f"documents: {report.documents}")
    print(f"lines: {report.lines}")
    print(f"intercept: {report.intercept:.4f}")
    print(f"auc: {report.auc:.4f}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    app = service.create_app(settings)
    if settings.db is not None:
        service.load_db(app, CorpusDb.load(Path(settings.db)))
    else:
        logger().warning("No database given; searches answer 503")
    app.run(host=args.host, port=settings.port, threaded=True)
    return EXIT_OK


def _add_encode(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "encode", help="Encode text files into FASTA and offset map sidecars."
    )
    parser.add_argument(
        "paths",
        metavar="PATH",
        type=Path,
        nargs="+",
        help="Files, directories or zips.",
    )
    parser.add_argument(
        "--keep-refs",
        action="store_true",
        help="Encode bibliography lines instead of leaving them out.",
    )
    parser.add_argument(
        "-j", "--jobs", type=int, default=1, help="Files to encode in parallel."
    )
    parser.add_argument(
        "--zip",
        type=Path,
        help="Zip the FASTAs here. Defaults to bundle.zip for several files.",
    )
    parser.set_defaults(func=cmd_encode)


def _add_submit(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "submit", help="Search a FASTA, or compare the FASTAs of a zip."
    )
    parser.add_argument("path", metavar="FASTA_OR_ZIP", type=Path)
    parser.add_argument(
        "--search",
        action="store_true",
        help="For zips, also search every document against the database.",
    )
    parser.set_defaults(func=cmd_submit)

    parser = subparsers.add_parser(
        "pairwise-submit", help="Compare FASTA files with each other."
    )
    parser.add_argument("paths", metavar="FASTA", type=Path, nargs="+")
    parser.add_argument(
        "--search",
        action="store_true",
        help="Also search every document against the database.",
    )
    parser.set_defaults(func=cmd_pairwise_submit)


def _add_report(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "report", help="Render the HTML report for an encoded source file."
    )
    parser.add_argument("source", metavar="SOURCE", type=Path)
    parser.add_argument(
        "--metadata",
        type=Path,
        help="Result metadata. Defaults to the .result.json next to SOURCE.",
    )
    parser.add_argument(
        "-o", "--out", type=Path, help="Defaults to the .report.html next to SOURCE."
    )
    parser.set_defaults(func=cmd_report)


def _add_db(subparsers: Any) -> None:
    parser = subparsers.add_parser("db", help="Build or inspect a database.")
    db_commands = parser.add_subparsers(dest="db_command", required=True)

    build = db_commands.add_parser("build", help="Build a database from a manifest.")
    build.add_argument("manifest", metavar="MANIFEST", type=Path)
    build.add_argument("out", metavar="OUT", type=Path)
    build.set_defaults(func=cmd_db_build)

    info = db_commands.add_parser("info", help="Print database statistics.")
    info.add_argument("db", metavar="DB", type=Path)
    info.add_argument(
        "--verify",
        action="store_true",
        help="Invert the index and check it against the registry.",
    )
    info.set_defaults(func=cmd_db_info)


def _add_eval(subparsers: Any) -> None:
    parser = subparsers.add_parser("eval", help="Measure the encoding and index.")
    eval_commands = parser.add_subparsers(dest="eval_command", required=True)

    fp = eval_commands.add_parser("fp", help="False-positive rate over a corpus.")
    fp.add_argument("--corpus", type=Path, action="append", required=True)
    fp.add_argument("--k", type=_int_list, default=list(pbs_eval.DEFAULT_KS))
    fp.add_argument(
        "--a",
        dest="alphabet_sizes",
        type=_int_list,
        default=list(pbs_eval.DEFAULT_AS),
    )
    fp.add_argument("--out", type=Path, help="Also write the TSV table here.")
    fp.add_argument("-j", "--jobs", type=int, default=1)
    fp.add_argument(
        "--memory-budget",
        type=int,
        default=pbs_eval.DEFAULT_MEMORY_BUDGET,
        help="Bytes of windows to hold at once before spilling to disk.",
    )
    fp.set_defaults(func=cmd_eval_fp)

    compress = eval_commands.add_parser("compress", help="Compression ratios.")
    compress.add_argument("--corpus", type=Path, action="append", default=[])
    compress.add_argument(
        "--synthetic",
        choices=("english", "chinese"),
        action="append",
        default=[],
        help="Measure a generated sample instead of, or besides, a corpus.",
    )
    compress.add_argument("--size", type=int, default=1024 * 1024)
    compress.add_argument("--no-db", action="store_true", help="Skip index sizes.")
    compress.set_defaults(func=cmd_eval_compress)

    bench = eval_commands.add_parser("bench", help="Search throughput.")
    bench.add_argument("--genome-length", type=int, default=1_000_000)
    bench.add_argument("--queries", type=int, default=10_000)
    bench.add_argument("--query-length", type=int, default=12)
    bench.add_argument("--naive-queries", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_eval_bench)

    refs = eval_commands.add_parser("refs", help="Reference filter ROC AUC.")
    refs.add_argument("--documents", type=int, default=60)
    refs.add_argument("--seed", type=int, default=7)
    refs.add_argument("--calibrate", action="store_true")
    refs.set_defaults(func=cmd_eval_refs)


def _add_serve(subparsers: Any) -> None:
    parser = subparsers.add_parser("serve", help="Run the search service.")
    parser.add_argument("--db", type=Path, help="Database to load at start.")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int)
    parser.add_argument("--max-body", type=int, help="Search body limit in bytes.")
    # Same destinations as the global flags; SUPPRESS keeps a global value.
    parser.add_argument(
        "--seed-k", type=int, default=argparse.SUPPRESS, help="Seed length in words."
    )
    parser.add_argument(
        "--min-report",
        type=int,
        default=argparse.SUPPRESS,
        help="Shortest reported match.",
    )
    parser.set_defaults(func=cmd_serve)


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="pbsdup", description=__doc__)
    parser.add_argument("--version", action="version", version=config.release)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase log level. Defaults to logging.WARNING.",
    )
    parser.add_argument(
        "--config",
        type=Path,
        help=f"JSON settings file. Defaults to {DEFAULT_CONFIG} when present.",
    )
    parser.add_argument(
        "-a", "--a", dest="alphabet_size", type=int, help="PBS alphabet size."
    )
    parser.add_argument("--seed-k", type=int, help="Seed length in words.")
    parser.add_argument("--min-report", type=int, help="Shortest reported match.")
    parser.add_argument("--server", help="Search service URL.")

    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_encode(subparsers)
    _add_submit(subparsers)
    _add_report(subparsers)
    _add_db(subparsers)
    _add_eval(subparsers)
    _add_serve(subparsers)
    return parser.parse_args(argv)


def load_settings(args: argparse.Namespace) -> Settings:
    """Config file, then PBSDUP_* environment, then command line flags."""
    path = args.config
    if path is None and DEFAULT_CONFIG.is_file():
        path = DEFAULT_CONFIG
    settings = Settings.load(path)
    db = getattr(args, "db", None) if args.command == "serve" else None
    return settings.replace(
        alphabet_size=args.alphabet_size,
        seed_k=args.seed_k,
        min_report=args.min_report,
        server=args.server,
        db=str(db) if db is not None else None,
        port=getattr(args, "port", None),
        max_search_body=getattr(args, "max_body", None),
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)

    log_levels = [logging.WARNING, logging.INFO, logging.DEBUG]
    verbosity = min(args.verbose, len(log_levels) - 1)
    logging.basicConfig(level=log_levels[verbosity])

    try:
        settings = load_settings(args)
        command: Command = args.func
        return command(args, settings)
    except (PbsError, TaskError, OSError, RuntimeError, ValueError) as ex:
        print(f"pbsdup: {ex}", file=sys.stderr)
        return exit_code_for(ex)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
