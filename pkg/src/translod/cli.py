"""Command-line entry point: convert, transform, query, interlink, publish, serve."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import neptune, passim
from .interlink import Gazetteer, LinkSpec, discover_links
from .publish import (SUPPORTED, DatasetMeta, LinkedDataApp, ServerConfig, datahub_stub,
                      generate_sitemap, generate_void, make_server)
from .rdf import NEPTUNE, PASSIM, Graph, Iri
from .serializers import parse_ntriples, serialize_ntriples, serialize_turtle
from .sparql import format_tsv, parse_query, parse_rules, apply_rules, eval_select, eval_construct

log = logging.getLogger("translod")


class InputError(Exception):
    pass


def read_config(path: Optional[str]) -> dict:
    """key=value lines, '#' starts a comment line."""
    if not path:
        return {}
    cfg = {}
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _setting(args, cfg: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _base(args, cfg) -> str:
    base = _setting(args, cfg, "base")
    if not base:
        raise InputError("a base IRI is required (--base or 'base' in the config)")
    try:
        Iri(base)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if not base.endswith("/"):
        raise InputError("the base IRI must end with '/'")
    return base


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_graph(paths: List[str]) -> Graph:
    g = Graph()
    for p in paths:
        try:
            g.update(parse_ntriples(_read_bytes(p)))
        except ValueError as exc:
            raise InputError(f"{p}: {exc}") from None
    return g


def _write(out: Optional[str], data: bytes):
    if out and out != "-":
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _meta(args, cfg) -> DatasetMeta:
    base = _base(args, cfg)
    split = lambda key: [Iri(v) for v in cfg.get(key, "").split()]  # noqa: E731
    try:
        return DatasetMeta(
            dataset_iri=Iri(cfg.get("dataset_iri", base + "dataset")),
            title=cfg.get("title", "Transport data"),
            base=base,
            sparql_endpoint_path=cfg.get("sparql_endpoint_path", "/sparql"),
            dump_path=cfg.get("dump_path", "/dump.nt"),
            vocabularies=split("vocabularies") or [Iri(PASSIM), Iri(NEPTUNE)],
            example_resources=split("example_resources"),
        )
    except ValueError as exc:
        raise InputError(f"bad dataset metadata: {exc}") from None


def cmd_convert_passim(args, cfg) -> int:
    base = _base(args, cfg)
    try:
        records, errors = passim.parse_passim_csv(_read_bytes(args.inp[0]))
    except passim.PassimDecodeError as exc:
        raise InputError(str(exc)) from None
    for err in errors:
        log.warning("%s:%d: %s", args.inp[0], err.line, err.reason)
    g = passim.convert_records(records, base, raw=args.raw)
    _write(args.out, serialize_ntriples(g))
    log.info("%d records, %d rejected rows, %d triples", len(records), len(errors), len(g))
    return 0


def cmd_convert_neptune(args, cfg) -> int:
    base = _base(args, cfg)
    g = Graph()
    for path in args.inp:
        try:
            doc = neptune.parse_neptune_xml(_read_bytes(path), source_file=path)
        except neptune.NeptuneError as exc:
            raise InputError(f"{path}: {exc}") from None
        g.update(neptune.neptune_to_rdf(doc, base))
    _write(args.out, serialize_ntriples(g))
    return 0


def cmd_transform(args, cfg) -> int:
    g = _load_graph(args.inp)
    text = _read_bytes(args.rules).decode("utf-8") if args.rules else passim.rules_text()
    try:
        rules = parse_rules(text)
    except (ValueError, KeyError) as exc:
        raise InputError(f"rules: {exc}") from None
    _write(args.out, serialize_ntriples(apply_rules(g, rules)))
    return 0


def cmd_query(args, cfg) -> int:
    g = _load_graph(args.inp)
    text = args.query_text if args.query_text else _read_bytes(args.query).decode("utf-8")
    try:
        q = parse_query(text)
    except (ValueError, KeyError) as exc:
        raise InputError(f"query: {exc}") from None
    if q.kind == "SELECT":
        _write(args.out, format_tsv(q, eval_select(g, q)).encode("utf-8"))
    else:
        _write(args.out, serialize_ntriples(eval_construct(g, q)))
    return 0


def cmd_interlink(args, cfg) -> int:
    g = _load_graph(args.inp)
    gaz_path = _setting(args, cfg, "gazetteer")
    spec_path = _setting(args, cfg, "link_spec")
    if not gaz_path or not spec_path:
        raise InputError("interlink needs --gazetteer and --spec")
    try:
        gaz = Gazetteer.parse(_read_bytes(gaz_path))
        spec = LinkSpec.parse(_read_bytes(spec_path).decode("utf-8"))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    result = discover_links(g, gaz, spec)
    if result.skipped:
        log.warning("%d source resources had no label and were skipped", result.skipped)
    for link in result.links:
        log.info("%s -> %s (%.3f)", link.source.value, link.target.value, link.score)
    _write(args.out, serialize_ntriples(result.graph))
    return 0


def cmd_void(args, cfg) -> int:
    g = _load_graph(args.inp)
    meta = _meta(args, cfg)
    _write(args.out, serialize_turtle(generate_void(g, meta)))
    if args.datahub_stub:
        Path(args.datahub_stub).write_text(datahub_stub(meta, g), "utf-8")
    return 0


def cmd_sitemap(args, cfg) -> int:
    _write(args.out, generate_sitemap(_meta(args, cfg)))
    return 0


def cmd_serve(args, cfg) -> int:
    g = _load_graph(args.inp).freeze()
    meta = _meta(args, cfg)
    try:
        config = ServerConfig(
            host=_setting(args, cfg, "host", "127.0.0.1"),
            port=int(_setting(args, cfg, "port", 8080)),
            default_media_type=_setting(args, cfg, "default_media_type", "text/turtle"),
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        server = make_server(LinkedDataApp(g, meta, config))
    except OSError as exc:
        raise InputError(f"cannot listen on {config.host}:{config.port}: {exc}") from None
    log.warning("serving %d triples on http://%s:%d/", len(g), *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="translod", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def command(name, func, help, inputs="+"):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--base", help="base IRI for minted resources (ends with '/')")
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", help="output file (default: standard output)")
        if inputs:
            p.add_argument("--in", dest="inp", nargs=inputs, required=True, metavar="PATH")
        p.set_defaults(func=func)
        return p

    p = command("convert-passim", cmd_convert_passim, "convert a Passim CSV export to N-Triples", inputs=1)
    p.add_argument("--raw", action="store_true", help="emit raw RDF for the CONSTRUCT step")

    command("convert-neptune", cmd_convert_neptune, "convert NEPTUNE XML line files to N-Triples")

    p = command("transform", cmd_transform, "apply a CONSTRUCT rule file to N-Triples input")
    p.add_argument("--rules", help="rule file (default: shipped Passim rules)")

    p = command("query", cmd_query, "run a query against N-Triples dumps")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--query", help="query file")
    group.add_argument("--query-text", help="query text")

    p = command("interlink", cmd_interlink, "discover links against a gazetteer")
    p.add_argument("--gazetteer")
    p.add_argument("--spec", dest="link_spec")

    p = command("void", cmd_void, "write VoID metadata (Turtle)")
    p.add_argument("--datahub-stub", help="also write a CKAN package stub (JSON)")

    command("sitemap", cmd_sitemap, "write the semantic sitemap", inputs=None)

    p = command("serve", cmd_serve, "serve dumps as Linked Data with a SPARQL endpoint")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--default-media-type", choices=SUPPORTED)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = read_config(args.config)
        return args.func(args, cfg)
    except InputError as exc:
        print(f"translod {args.command}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
