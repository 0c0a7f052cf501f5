"""Command-line interface: validate, extract, check-domain, vocab import, serve.

Exit codes: 0 success/valid, 1 violations or issues found, 2 usage or input
parse error, 3 I/O or network failure.
"""

from __future__ import annotations

import json
import sys

import click

from sdoval import default_snapshot_path
from sdoval.annotation import (
    FetchError,
    block_to_json,
    extract_from_html,
    fetch_page,
)
from sdoval.completeness import InvalidDomain
from sdoval.domain import DomainError, check_domain, parse_domain_spec
from sdoval.pipeline import InvalidRuleSet, render_report, validate
from sdoval.ruleengine import CallingCodeTable, FunctionRegistry
from sdoval.rulelang import RuleError, parse_rule_set
from sdoval.vocabulary import (
    VocabularyError,
    VocabularySnapshot,
    import_snapshot,
    save_snapshot,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_IO = 3


def _fail(code: int, message: str):
    click.echo(f"sdoval: {message}", err=True)
    sys.exit(code)


def _read_bytes(path: str, stdin_ok: bool = False) -> bytes:
    if stdin_ok and path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")


def _load_vocab(path: str | None) -> VocabularySnapshot:
    if path is None:
        data = default_snapshot_path().read_bytes()
    else:
        data = _read_bytes(path)
    try:
        return VocabularySnapshot.from_json_bytes(data)
    except VocabularyError as exc:
        _fail(EXIT_INPUT, f"bad vocabulary snapshot: {exc}")


@click.group()
@click.version_option(package_name="sdoval")
def main():
    """Validate schema.org annotations against domain specifications."""


@main.command("validate")
@click.option("--domain", "domain_path", required=True, metavar="SPEC.JSON",
              help="Domain specification file.")
@click.option("--rules", "rules_path", metavar="RULES.JSON",
              help="Rule set file for the semantic consistency stage.")
@click.option("--vocab", "vocab_path", envvar="SDOVAL_VOCAB", metavar="SNAPSHOT.JSON",
              help="Vocabulary snapshot (defaults to the bundled one).")
@click.option("--calling-codes", "cc_path", envvar="SDOVAL_CC", metavar="TABLE.JSON",
              help="Country calling-code table (defaults to the bundled one).")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]),
              help="Report format; defaults to text on terminals, json when piped.")
@click.argument("annotation", metavar="ANNOTATION.JSON|-")
def validate_command(domain_path, rules_path, vocab_path, cc_path, fmt, annotation):
    """Run the three-stage validation over one annotation ('-' reads stdin)."""
    snapshot = _load_vocab(vocab_path)
    try:
        spec = parse_domain_spec(_read_bytes(domain_path))
    except DomainError as exc:
        _fail(EXIT_INPUT, f"bad domain specification: {exc}")
    rule_set = None
    if rules_path is not None:
        try:
            rule_set = parse_rule_set(_read_bytes(rules_path), spec, snapshot)
        except (RuleError, DomainError) as exc:
            _fail(EXIT_INPUT, f"bad rule set: {exc}")
    try:
        table = CallingCodeTable.load(cc_path) if cc_path else CallingCodeTable.default()
    except (OSError, ValueError) as exc:
        _fail(EXIT_INPUT, f"bad calling-code table: {exc}")
    registry = FunctionRegistry(table)

    source = "inline" if annotation == "-" else annotation
    data = _read_bytes(annotation, stdin_ok=True)
    try:
        report = validate(data, spec, rule_set, snapshot, registry, source=source)
    except (InvalidDomain, InvalidRuleSet) as exc:
        _fail(EXIT_INPUT, str(exc))
    if fmt is None:
        fmt = "text" if sys.stdout.isatty() else "json"
    sys.stdout.buffer.write(render_report(report, fmt))
    sys.stdout.buffer.flush()
    sys.exit(EXIT_OK if report.verdict == "Valid" else EXIT_VIOLATIONS)


@main.command("extract")
@click.option("--url", "url", metavar="URL", help="Fetch the page over http(s).")
@click.option("--file", "file_path", metavar="PAGE.HTML", help="Read the page from disk.")
@click.option("--index", "index", type=int, default=None,
              help="Print only the block at this position.")
def extract_command(url, file_path, index):
    """Extract application/ld+json blocks from an HTML page."""
    if (url is None) == (file_path is None):
        _fail(EXIT_INPUT, "exactly one of --url or --file is required")
    if url is not None:
        try:
            page = fetch_page(url, timeout=10.0)
        except ValueError as exc:
            _fail(EXIT_INPUT, str(exc))
        except FetchError as exc:
            _fail(EXIT_IO, f"fetch failed: {exc}")
    else:
        page = _read_bytes(file_path)
    blocks = extract_from_html(page)
    payload = [block_to_json(b) for b in blocks]
    if index is not None:
        if not 0 <= index < len(payload):
            _fail(EXIT_INPUT, f"block index {index} out of range (found {len(payload)})")
        click.echo(json.dumps(payload[index], indent=2, ensure_ascii=False))
        sys.exit(EXIT_VIOLATIONS if "error" in payload[index] else EXIT_OK)
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))
    sys.exit(EXIT_VIOLATIONS if any("error" in b for b in payload) else EXIT_OK)


@main.command("check-domain")
@click.option("--vocab", "vocab_path", envvar="SDOVAL_VOCAB", metavar="SNAPSHOT.JSON",
              help="Vocabulary snapshot (defaults to the bundled one).")
@click.argument("spec_path", metavar="SPEC.JSON")
def check_domain_command(vocab_path, spec_path):
    """Check a domain specification against the vocabulary; one issue per line."""
    snapshot = _load_vocab(vocab_path)
    try:
        spec = parse_domain_spec(_read_bytes(spec_path))
    except DomainError as exc:
        _fail(EXIT_INPUT, f"bad domain specification: {exc}")
    issues = check_domain(spec, snapshot)
    for issue in issues:
        click.echo(f"{issue.code} {issue.path}: {issue.message}")
    sys.exit(EXIT_VIOLATIONS if issues else EXIT_OK)


@main.group("vocab")
def vocab_group():
    """Vocabulary snapshot maintenance."""


@vocab_group.command("import")
@click.argument("release_path", metavar="SCHEMAORG-RELEASE.JSONLD")
@click.option("-o", "--output", "output_path", required=True, metavar="SNAPSHOT.JSON",
              help="Where to write the snapshot.")
@click.option("--label", "label", default=None,
              help="Version label recorded in the snapshot.")
def vocab_import_command(release_path, output_path, label):
    """Import an official schema.org JSON-LD release into a pinned snapshot."""
    data = _read_bytes(release_path)
    try:
        snapshot = import_snapshot(data, version=label)
    except VocabularyError as exc:
        _fail(EXIT_INPUT, f"import failed: {exc}")
    try:
        save_snapshot(snapshot, output_path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {output_path}: {exc.strerror or exc}")
    click.echo(
        f"imported {len(snapshot.classes)} classes, "
        f"{len(snapshot.properties)} properties -> {output_path}"
    )


@main.command("serve")
@click.option("--port", envvar="SDOVAL_PORT", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_root", envvar="SDOVAL_STORE", default="./store",
              show_default=True, help="Directory for persisted domains and rule sets.")
@click.option("--vocab", "vocab_path", envvar="SDOVAL_VOCAB", default=None,
              help="Vocabulary snapshot (defaults to the bundled one).")
@click.option("--calling-codes", "cc_path", envvar="SDOVAL_CC", default=None,
              help="Country calling-code table (defaults to the bundled one).")
@click.option("--cors-origin", "cors_origin", default="*", show_default=True)
@click.option("--allow-local-urls", is_flag=True, default=False,
              help="Permit extraction from loopback/link-local targets.")
@click.option("--static", "static_dir", default=None, metavar="DIR",
              help="Serve the built web UI from this directory.")
def serve_command(port, host, store_root, vocab_path, cc_path, cors_origin,
                  allow_local_urls, static_dir):
    """Start the HTTP API backing the web UI."""
    from sdoval.service import ServiceConfig, serve

    config = ServiceConfig(
        host=host,
        port=port,
        store_root=store_root,
        snapshot_path=vocab_path,
        calling_code_path=cc_path,
        cors_origin=cors_origin,
        allow_local_urls=allow_local_urls,
        static_dir=static_dir,
    )
    try:
        serve(config)
    except Exception as exc:  # startup failures exit nonzero with a message
        _fail(EXIT_IO, f"service failed to start: {exc}")


if __name__ == "__main__":
    main()
