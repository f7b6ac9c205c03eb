import threading
import time
import urllib.parse
import urllib.request

import pytest

from conftest import FIXTURES
from synth import BASE, neptune_xml, passim_records
from translod import cli
from translod.passim import COLUMNS, PassimRecord, convert_records
from translod.rdf import PASSIM, Iri, Literal, Triple
from translod.serializers import parse_ntriples, serialize_ntriples
from translod.sparql import eval_select, format_tsv, parse_query

TAM_QUERY = ('SELECT DISTINCT ?city WHERE { ?s passim:serviceName ?o . '
             '?s passim:cityThrough ?city . FILTER (?o = "TaM") }')


def write_csv(path, records):
    header = ";".join(h for h, _ in COLUMNS)
    lines = [header] + [";".join(r.cells()) for r in records]
    path.write_text("\n".join(lines) + "\n", "utf-8")


@pytest.fixture
def csv_30(tmp_path):
    path = tmp_path / "passim.csv"
    write_csv(path, passim_records(30))
    return path


def test_convert_sample_fixture(tmp_path):
    out = tmp_path / "out.nt"
    rc = cli.run(["convert-passim", "--in", str(FIXTURES / "passim_sample.csv"),
                  "--base", BASE, "--out", str(out)])
    assert rc == 0
    g = parse_ntriples(out.read_bytes())
    assert Triple(Iri(BASE + "passim/service/1"), Iri(PASSIM + "serviceName"), Literal("05voyageurs")) in g


def test_stdout_and_idempotent(csv_30, capsysbinary):
    assert cli.run(["convert-passim", "--in", str(csv_30), "--base", BASE]) == 0
    first = capsysbinary.readouterr().out
    assert cli.run(["convert-passim", "--in", str(csv_30), "--base", BASE]) == 0
    assert capsysbinary.readouterr().out == first
    assert parse_ntriples(first) == convert_records(passim_records(30), BASE)


def test_raw_then_transform_equals_direct(csv_30, tmp_path):
    raw, onto, direct = tmp_path / "raw.nt", tmp_path / "onto.nt", tmp_path / "direct.nt"
    assert cli.run(["convert-passim", "--raw", "--in", str(csv_30), "--base", BASE, "--out", str(raw)]) == 0
    assert cli.run(["transform", "--in", str(raw), "--out", str(onto)]) == 0
    assert cli.run(["convert-passim", "--in", str(csv_30), "--base", BASE, "--out", str(direct)]) == 0
    assert onto.read_bytes() == direct.read_bytes()


def test_config_supplies_base(csv_30, tmp_path, capsysbinary):
    cfg = tmp_path / "translod.conf"
    cfg.write_text(f"# settings\nbase = {BASE}\n", "utf-8")
    assert cli.run(["convert-passim", "--in", str(csv_30), "--config", str(cfg)]) == 0
    assert capsysbinary.readouterr().out.startswith(b"<" + BASE.encode())


def test_bad_rows_are_reported(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    good = ";".join(PassimRecord(sheet_number=4, service_name="Envia").cells())
    path.write_text("4;too;few\n" + good + "\n", "utf-8")
    assert cli.run(["convert-passim", "--in", str(path), "--base", BASE]) == 0
    captured = capsys.readouterr()
    assert "expected 20 fields" in captured.err
    assert "Envia" in captured.out


def test_convert_neptune(tmp_path, capsysbinary):
    xml = tmp_path / "line.xml"
    xml.write_bytes(neptune_xml(4))
    assert cli.run(["convert-neptune", "--in", str(xml), str(FIXTURES / "neptune_sample.xml"),
                    "--base", BASE]) == 0
    out = capsysbinary.readouterr().out
    assert b'"5.7949447631835940"^^<http://www.w3.org/2001/XMLSchema#decimal>' in out


def test_query_tsv(csv_30, tmp_path, capsys):
    nt = tmp_path / "d.nt"
    cli.run(["convert-passim", "--in", str(csv_30), "--base", BASE, "--out", str(nt)])
    assert cli.run(["query", "--in", str(nt), "--query-text", TAM_QUERY]) == 0
    g = parse_ntriples(nt.read_bytes())
    q = parse_query(TAM_QUERY)
    assert capsys.readouterr().out == format_tsv(q, eval_select(g, q))


def test_interlink(tmp_path, capsysbinary):
    nt = tmp_path / "d.nt"
    nt.write_bytes(serialize_ntriples(convert_records(passim_records(10), BASE)))
    assert cli.run(["interlink", "--in", str(nt), "--gazetteer", str(FIXTURES / "gazetteer_communes.csv"),
                    "--spec", str(FIXTURES / "linkspec.conf")]) == 0
    links = parse_ntriples(capsysbinary.readouterr().out)
    assert Triple(Iri(BASE + "passim/coverage/1"), Iri("http://www.w3.org/2002/07/owl#sameAs"),
                  Iri("http://gazetteer.example.org/commune/Montpellier")) in links


def test_void_and_sitemap(tmp_path, capsys):
    nt = tmp_path / "d.nt"
    nt.write_bytes(serialize_ntriples(convert_records(passim_records(3), BASE)))
    stub = tmp_path / "datahub.json"
    assert cli.run(["void", "--in", str(nt), "--base", BASE, "--datahub-stub", str(stub)]) == 0
    assert "void:triples" in capsys.readouterr().out
    assert stub.exists()
    assert cli.run(["sitemap", "--base", BASE]) == 0
    assert "sc:dataset" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["bogus"], ["query", "--in", "x"],
                                  ["serve", "--in", "x", "--port", "notanumber"]])
def test_usage_errors(argv, capsys):
    assert cli.run(argv) == 2


def test_input_errors(tmp_path, capsys):
    missing = str(tmp_path / "nope.csv")
    assert cli.run(["convert-passim", "--in", missing, "--base", BASE]) == 1
    assert "cannot read" in capsys.readouterr().err
    assert cli.run(["convert-passim", "--in", str(FIXTURES / "passim_sample.csv")]) == 1
    assert cli.run(["convert-passim", "--in", str(FIXTURES / "passim_sample.csv"),
                    "--base", "http://no-slash"]) == 1
    bad = tmp_path / "bad.nt"
    bad.write_bytes(b"not ntriples\n")
    assert cli.run(["query", "--in", str(bad), "--query-text", TAM_QUERY]) == 1
    assert cli.run(["transform", "--in", str(bad), "--rules", missing]) == 1
    good = tmp_path / "good.nt"
    good.write_bytes(b"")
    assert cli.run(["query", "--in", str(good), "--query-text", "SELECT ?x WHERE {"]) == 1
    assert cli.run(["serve", "--in", str(good), "--base", BASE, "--port", "0",
                    "--host", "256.1.1.1"]) == 1


def test_full_pipeline_through_server(csv_30, tmp_path, monkeypatch):
    raw, onto = tmp_path / "raw.nt", tmp_path / "onto.nt"
    xml = tmp_path / "line.xml"
    xml.write_bytes(neptune_xml(6))
    stops = tmp_path / "stops.nt"
    assert cli.run(["convert-passim", "--raw", "--in", str(csv_30), "--base", BASE, "--out", str(raw)]) == 0
    assert cli.run(["transform", "--in", str(raw), "--out", str(onto)]) == 0
    assert cli.run(["convert-neptune", "--in", str(xml), "--base", BASE, "--out", str(stops)]) == 0

    servers = []
    real = cli.make_server

    def capture(app):
        server = real(app)
        servers.append(server)
        return server

    monkeypatch.setattr(cli, "make_server", capture)
    result = {}
    t = threading.Thread(target=lambda: result.setdefault(
        "rc", cli.run(["serve", "--in", str(onto), str(stops), "--base", BASE, "--port", "0"])))
    t.start()
    for _ in range(200):
        if servers:
            break
        time.sleep(0.01)
    server = servers[0]
    try:
        url = f"http://127.0.0.1:{server.server_address[1]}/sparql?" + urllib.parse.urlencode({"query": TAM_QUERY})
        with urllib.request.urlopen(url, timeout=10) as resp:
            body = resp.read().decode()
    finally:
        server.shutdown()
        t.join(10)
    assert result["rc"] == 0
    g = parse_ntriples(onto.read_bytes())
    q = parse_query(TAM_QUERY)
    assert body == format_tsv(q, eval_select(g, q))
    assert "Castelnau-le-Lez" in body
