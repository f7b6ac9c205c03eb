"""Dataset publication: VoID, semantic sitemap, and the Linked Data HTTP server."""

from __future__ import annotations

import html
import json
import logging
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, List, NamedTuple, Optional, Tuple
from urllib.parse import parse_qs, unquote, urlsplit
from xml.sax.saxutils import escape as xml_escape

from .rdf import (DCTERMS, RDF_TYPE, VOID, XSD, Graph, Iri, Literal, NamespaceMap,
                  Triple)
from .serializers import serialize_ntriples, serialize_turtle
from .sparql import QueryError, eval_construct, eval_select, format_tsv, parse_query

log = logging.getLogger(__name__)

HTML = "text/html"
TURTLE = "text/turtle"
NTRIPLES = "application/n-triples"
TSV = "text/tab-separated-values"
SUPPORTED = (HTML, TURTLE, NTRIPLES)

SITEMAP_NS = "http://www.sitemaps.org/schemas/sitemap/0.9"
SC_NS = "http://sw.deri.org/2007/07/sitemapextension/scschema.xsd"


class NotAcceptable(Exception):
    pass


@dataclass
class DatasetMeta:
    dataset_iri: Iri
    title: str
    base: str
    sparql_endpoint_path: str = "/sparql"
    dump_path: str = "/dump.nt"
    vocabularies: List[Iri] = field(default_factory=list)
    example_resources: List[Iri] = field(default_factory=list)

    def __post_init__(self):
        for path in (self.sparql_endpoint_path, self.dump_path):
            if not path.startswith("/"):
                raise ValueError(f"paths must begin with '/': {path!r}")
        Iri(self.base)

    def url(self, path: str) -> str:
        return self.base.rstrip("/") + path


def generate_void(g: Graph, meta: DatasetMeta) -> Graph:
    ds = meta.dataset_iri
    v = lambda local: Iri(VOID + local)  # noqa: E731
    out = Graph()
    out.add(Triple(ds, RDF_TYPE, v("Dataset")))
    out.add(Triple(ds, Iri(DCTERMS + "title"), Literal(meta.title)))
    out.add(Triple(ds, v("triples"), Literal(str(len(g)), datatype=Iri(XSD + "integer"))))
    out.add(Triple(ds, v("sparqlEndpoint"), Iri(meta.url(meta.sparql_endpoint_path))))
    out.add(Triple(ds, v("dataDump"), Iri(meta.url(meta.dump_path))))
    out.add(Triple(ds, v("uriSpace"), Literal(meta.base)))
    for vocab in meta.vocabularies:
        out.add(Triple(ds, v("vocabulary"), vocab))
    for res in meta.example_resources:
        out.add(Triple(ds, v("exampleResource"), res))
    return out


def generate_sitemap(meta: DatasetMeta) -> bytes:
    e = xml_escape
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<urlset xmlns="{SITEMAP_NS}" xmlns:sc="{SC_NS}">',
        "  <sc:dataset>",
        f"    <sc:datasetLabel>{e(meta.title)}</sc:datasetLabel>",
        f"    <sc:datasetURI>{e(meta.dataset_iri.value)}</sc:datasetURI>",
        f'    <sc:linkedDataPrefix sc:slicing="subject-object">{e(meta.url("/resource/"))}</sc:linkedDataPrefix>',
    ]
    for res in meta.example_resources:
        lines.append(f"    <sc:sampleURI>{e(res.value)}</sc:sampleURI>")
    lines += [
        f"    <sc:sparqlEndpointLocation>{e(meta.url(meta.sparql_endpoint_path))}</sc:sparqlEndpointLocation>",
        f"    <sc:dataDumpLocation>{e(meta.url(meta.dump_path))}</sc:dataDumpLocation>",
        "  </sc:dataset>",
        "</urlset>",
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


def datahub_stub(meta: DatasetMeta, g: Graph) -> str:
    """A CKAN-style package description, for manual registration."""
    package = {
        "name": meta.title.lower().replace(" ", "-"),
        "title": meta.title,
        "url": meta.dataset_iri.value,
        "resources": [
            {"url": meta.url(meta.sparql_endpoint_path), "format": "api/sparql"},
            {"url": meta.url(meta.dump_path), "format": "application/n-triples"},
        ],
        "extras": {"triples": str(len(g))},
    }
    return json.dumps(package, indent=2, ensure_ascii=False) + "\n"


def _parse_accept(header: str) -> List[Tuple[str, float]]:
    ranges = []
    for part in header.split(","):
        bits = [b.strip() for b in part.split(";")]
        media = bits[0].lower()
        if "/" not in media:
            continue
        q = 1.0
        for param in bits[1:]:
            if param.lower().startswith("q="):
                try:
                    q = float(param[2:])
                except ValueError:
                    q = 0.0
                q = min(max(q, 0.0), 1.0)
        ranges.append((media, q))
    return ranges


def negotiate_content(accept: Optional[str], default: str = TURTLE,
                      supported: Tuple[str, ...] = SUPPORTED) -> str:
    """Pick a media type from an Accept header; raises NotAcceptable.

    Each supported type takes the q of its most specific matching range.
    Among types tied on q, those named explicitly (or via ``type/*``) beat
    ones only reached through ``*/*``, which resolve to the default.
    """
    if default not in supported:
        default = supported[0]
    if accept is None or not accept.strip():
        return default
    ranges = _parse_accept(accept)
    scored = []
    for order, media in enumerate(supported):
        major = media.split("/")[0]
        best = None  # (specificity, q)
        for rng, q in ranges:
            if rng == media:
                spec = 2
            elif rng == f"{major}/*":
                spec = 1
            elif rng == "*/*":
                spec = 0
            else:
                continue
            if best is None or spec > best[0]:
                best = (spec, q)
        if best is not None and best[1] > 0:
            scored.append((best[1], best[0] > 0, media, order))
    if not scored:
        raise NotAcceptable(accept)
    top = max(q for q, *_ in scored)
    tied = [s for s in scored if s[0] == top]
    explicit = [s for s in tied if s[1]]
    if explicit:
        return min(explicit, key=lambda s: s[3])[2]
    names = [s[2] for s in tied]
    return default if default in names else names[0]


class Response(NamedTuple):
    status: int
    content_type: str
    body: bytes
    headers: Dict[str, str] = {}


def _text(status: int, message: str) -> Response:
    return Response(status, "text/plain; charset=utf-8", (message + "\n").encode("utf-8"))


def _render_html(iri: Iri, g: Graph, ns: NamespaceMap) -> bytes:
    from .serializers import _Compactor

    c = _Compactor(ns)
    esc = html.escape
    rows = []
    for t in g.sorted_triples():
        if t.subject == iri:
            rows.append(f"<tr><td>{esc(c.term(t.predicate))}</td><td>{esc(c.term(t.object))}</td></tr>")
    for t in g.sorted_triples():
        if t.object == iri and t.subject != iri:
            rows.append(f"<tr><td>is {esc(c.term(t.predicate))} of</td>"
                        f"<td>{esc(c.term(t.subject))}</td></tr>")
    title = esc(iri.value)
    doc = (
        "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>"
        f"{title}</title></head>\n<body>\n<h1>{title}</h1>\n"
        "<table>\n<tr><th>property</th><th>value</th></tr>\n"
        + "\n".join(rows) + "\n</table>\n</body>\n</html>\n"
    )
    return doc.encode("utf-8")


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    default_media_type: str = TURTLE
    resource_prefix: str = "/resource/"

    def __post_init__(self):
        if self.default_media_type not in SUPPORTED:
            raise ValueError(f"unsupported default media type {self.default_media_type!r}")


def _rdf_body(g: Graph, media: str, ns: NamespaceMap) -> bytes:
    if media == NTRIPLES:
        return serialize_ntriples(g)
    return serialize_turtle(g, ns)


class LinkedDataApp:
    """Request handling over a frozen graph, independent of any socket."""

    def __init__(self, graph: Graph, meta: DatasetMeta, config: Optional[ServerConfig] = None,
                 ns: Optional[NamespaceMap] = None):
        if not graph.frozen:
            raise ValueError("serve a frozen graph")
        self.graph = graph
        self.meta = meta
        self.config = config or ServerConfig()
        self.ns = ns or NamespaceMap()
        # rendered once: the graph never changes under a running server
        self._void = serialize_turtle(generate_void(graph, meta), self.ns)
        self._sitemap = generate_sitemap(meta)
        self._dump = serialize_ntriples(graph)

    def describe(self, iri: Iri) -> Graph:
        """Concise description: triples with iri as subject plus those with it as object."""
        out = Graph(self.graph.match(iri, None, None))
        out.update(self.graph.match(None, None, iri))
        return out

    def handle_resource_request(self, path: str, accept: Optional[str]) -> Response:
        rest = path[len(self.config.resource_prefix):]
        try:
            iri = Iri(self.meta.base + unquote(rest))
        except ValueError:
            return _text(404, "not found")
        if self.graph.count(iri, None, None) == 0 and self.graph.count(None, None, iri) == 0:
            return _text(404, f"no description for {iri.value}")
        try:
            media = negotiate_content(accept, self.config.default_media_type)
        except NotAcceptable:
            return _text(406, "supported types: " + ", ".join(SUPPORTED))
        desc = self.describe(iri)
        headers = {"Vary": "Accept"}
        if media == HTML:
            return Response(200, "text/html; charset=utf-8", _render_html(iri, desc, self.ns), headers)
        return Response(200, f"{media}; charset=utf-8", _rdf_body(desc, media, self.ns), headers)

    def handle_sparql_request(self, query: Optional[str], accept: Optional[str] = None) -> Response:
        if not query:
            return _text(400, "missing 'query' parameter")
        try:
            q = parse_query(query, self.ns)
        except (QueryError, KeyError, ValueError) as exc:
            return _text(400, str(exc))
        if q.kind == "SELECT":
            rows = eval_select(self.graph, q)
            return Response(200, f"{TSV}; charset=utf-8", format_tsv(q, rows).encode("utf-8"))
        try:
            media = negotiate_content(accept, TURTLE, supported=(TURTLE, NTRIPLES))
        except NotAcceptable:
            return _text(406, f"supported types: {TURTLE}, {NTRIPLES}")
        return Response(200, f"{media}; charset=utf-8",
                        _rdf_body(eval_construct(self.graph, q), media, self.ns))

    def handle(self, method: str, target: str, headers: Optional[dict] = None,
               body: bytes = b"") -> Response:
        headers = {k.lower(): v for k, v in (headers or {}).items()}
        accept = headers.get("accept")
        url = urlsplit(target)
        path = url.path
        sparql_path = self.meta.sparql_endpoint_path

        if path == sparql_path:
            if method == "GET":
                query = parse_qs(url.query).get("query", [None])[0]
                return self.handle_sparql_request(query, accept)
            if method == "POST":
                ctype = headers.get("content-type", "").split(";")[0].strip().lower()
                text = body.decode("utf-8", "replace")
                if ctype == "application/sparql-query":
                    return self.handle_sparql_request(text, accept)
                query = parse_qs(text).get("query", [None])[0]
                return self.handle_sparql_request(query, accept)
            return self._not_allowed("GET, POST")

        if method != "GET":
            return self._not_allowed("GET")
        if path.startswith(self.config.resource_prefix):
            return self.handle_resource_request(path, accept)
        if path == "/void":
            return Response(200, f"{TURTLE}; charset=utf-8", self._void)
        if path == "/sitemap.xml":
            return Response(200, "application/xml; charset=utf-8", self._sitemap)
        if path == self.meta.dump_path:
            return Response(200, f"{NTRIPLES}; charset=utf-8", self._dump)
        return _text(404, "not found")

    @staticmethod
    def _not_allowed(allow: str) -> Response:
        return Response(405, "text/plain; charset=utf-8", b"method not allowed\n", {"Allow": allow})


def _handler_class(app: LinkedDataApp):
    class Handler(BaseHTTPRequestHandler):
        server_version = "translod"

        def _dispatch(self, method: str):
            length = int(self.headers.get("Content-Length") or 0)
            body = self.rfile.read(length) if length else b""
            resp = app.handle(method, self.path, dict(self.headers.items()), body)
            self.send_response(resp.status)
            self.send_header("Content-Type", resp.content_type)
            self.send_header("Content-Length", str(len(resp.body)))
            for k, v in resp.headers.items():
                self.send_header(k, v)
            self.end_headers()
            if method != "HEAD":
                self.wfile.write(resp.body)

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

        def do_PUT(self):
            self._dispatch("PUT")

        def do_DELETE(self):
            self._dispatch("DELETE")

        def do_PATCH(self):
            self._dispatch("PATCH")

        def log_message(self, fmt, *args):
            log.info("%s " + fmt, self.address_string(), *args)

    return Handler


def make_server(app: LinkedDataApp) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((app.config.host, app.config.port), _handler_class(app))


def serve_in_thread(app: LinkedDataApp) -> Tuple[ThreadingHTTPServer, threading.Thread]:
    server = make_server(app)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
