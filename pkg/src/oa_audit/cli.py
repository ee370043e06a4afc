"""Command line entry point: ``oa-audit <run|ingest|harvest|match|report> [flags]``.

Exit status: 0 success, 2 configuration, 3 harvest, 4 integrity, 5 I/O.
"""

from __future__ import annotations

import argparse
import datetime as dt
import logging
import sys

from .errors import AuditError, ConfigError
from .pipeline import AuditConfig, STAGES, run_audit, stage_ingest

logger = logging.getLogger("oa_audit")


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML file with AuditConfig keys; flags given here take precedence")
    p.add_argument("--institutions", help='comma-separated acronyms, or "all"')
    p.add_argument("--from-year", dest="year_from", type=int)
    p.add_argument("--to-year", dest="year_to", type=int)
    p.add_argument("--published", action="extend", nargs="+", metavar="PATH", help="citation-index export file(s)")
    p.add_argument("--published-format", choices=["auto", "tagged", "delimited"])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--fixtures", metavar="DIR", help="recorded harvest pages <DIR>/<target>/<offset>.xml")
    src.add_argument("--endpoint", metavar="URL", help="live search endpoint (default: $OA_AUDIT_ENDPOINT)")
    p.add_argument("--romeo", metavar="PATH", help="journal colour snapshot")
    p.add_argument("--terms", metavar="PATH", help="government funder term list")
    p.add_argument("--policies", metavar="PATH", help="institutional policy registry")
    p.add_argument("--profiles", metavar="PATH", help="institution profiles (address expressions)")
    p.add_argument("--threshold", type=float, help="review-queue title similarity (default 0.9)")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--format", choices=["delimited", "structured"])
    p.add_argument("--jobs", type=int)
    p.add_argument("--audit-date", type=dt.date.fromisoformat, metavar="YYYY-MM-DD")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="oa-audit",
        description="Measure open-access deposit compliance of institutions against their repositories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run every stage end to end")
    ingest = sub.add_parser("ingest", parents=[common], help="parse exports and assign institutions")
    ingest.add_argument("--dry-run", action="store_true", help="print record counts only")
    sub.add_parser("harvest", parents=[common], help="fetch repository records")
    sub.add_parser("match", parents=[common], help="deduplicate, classify and link")
    sub.add_parser("report", parents=[common], help="compute indices and write the report")
    return parser


_CONFIG_KEYS = (
    "institutions", "year_from", "year_to", "published", "published_format", "fixtures", "endpoint",
    "romeo", "terms", "policies", "profiles", "threshold", "out", "format", "jobs", "audit_date",
)


def config_from_args(args: argparse.Namespace) -> AuditConfig:
    flags = {k: getattr(args, k) for k in _CONFIG_KEYS if getattr(args, k, None) is not None}
    if args.config:
        return AuditConfig.from_file(args.config, **flags)
    return AuditConfig(**flags)


def _print_counts(data: dict) -> None:
    funded = {uid for uid, terms in data["funding"].items() if terms}
    print(f"parsed\t{data['parsed']}")
    for acronym, uids in sorted(data["institutions"].items()):
        print(f"{acronym}\t{len(uids)}\t{sum(1 for u in uids if u in funded)}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        try:
            config = config_from_args(args)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if args.command == "run":
            run_audit(config)
        elif args.command == "ingest" and args.dry_run:
            _print_counts(stage_ingest(config, dry_run=True))
        else:
            STAGES[args.command](config)
    except AuditError as exc:
        print(f"oa-audit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
