import pytest

from oa_audit.diagnostics import Diagnostics
from oa_audit.errors import HarvestError, HarvestParseError
from oa_audit.harvest import (
    FixtureSource,
    HarvestRequest,
    RepoRecord,
    build_query,
    build_url,
    fetch_all,
    filter_articles,
    is_article,
    parse_dc,
    parse_page,
    serialize_dc,
)

from _mockserver import corpus, scripted_endpoint

DC = b"""<?xml version="1.0" encoding="UTF-8"?>
<results xmlns:dc="http://purl.org/dc/elements/1.1/" total="3" offset="0">
  <record>
    <dc:title>First deposit</dc:title>
    <dc:creator>Garcia, Ana</dc:creator>
    <dc:creator>Puig, Jordi</dc:creator>
    <dc:date>2013-05-02</dc:date>
    <dc:identifier>http://hdl.handle.net/1/1</dc:identifier>
    <dc:identifier>https://doi.org/10.1000/XYZ</dc:identifier>
    <dc:relation>info:eu-repo/grantAgreement/MINECO/PN/CTQ2011-1</dc:relation>
    <dc:rights>info:eu-repo/semantics/openAccess</dc:rights>
    <dc:type>info:eu-repo/semantics/article</dc:type>
  </record>
  <record>
    <dc:creator>Nobody</dc:creator>
  </record>
  <record>
    <dc:title>Thesis</dc:title>
    <dc:date>2012</dc:date>
    <dc:type>info:eu-repo/semantics/doctoralThesis</dc:type>
  </record>
</results>
"""

SOLR = b"""<response><result name="response" numFound="1" start="0">
<doc><str name="dctitle">Solr record</str><arr name="dcidentifier"><str>oai:x:9</str><str>doi:10.1000/Q</str></arr>
<int name="dcyear">2014</int><str name="dctypenorm">121</str></doc>
</result></response>"""


def test_parse_dc_accumulates_repeated_elements():
    diag = Diagnostics()
    page = parse_page(DC, "t", diagnostics=diag)
    assert page.total_reported == 3
    first, thesis = page.records
    assert first.creators == ("Garcia, Ana", "Puig, Jordi")
    assert first.record_id == "http://hdl.handle.net/1/1"
    assert first.dois == ("10.1000/xyz",)
    assert first.year == 2013 and is_article(first) and not is_article(thesis)
    assert thesis.record_id == "t#2"
    assert diag.count("titleless") == 1


def test_parse_solr_style_document():
    (rec,) = parse_dc(SOLR, "x")
    assert (rec.title, rec.year, rec.dois, is_article(rec)) == ("Solr record", 2014, ("10.1000/q",), True)


def test_serialize_round_trip():
    records = parse_dc(DC, "t")
    assert parse_dc(serialize_dc(records, "t"), "t") == records


def test_malformed_markup_reports_path():
    with pytest.raises(HarvestParseError, match=r"/results\[1\]/record\[1\]"):
        parse_page(b"<results><record><title>x</record></results>")


def test_filter_articles_quarantines_missing_year():
    recs = [RepoRecord("t", "a", "1", year=2013, doc_type_raw="article"),
            RepoRecord("t", "b", "2", year=None, doc_type_raw="article"),
            RepoRecord("t", "c", "3", year=2011, doc_type_raw="article"),
            RepoRecord("t", "d", "4", year=2013, doc_type_raw="thesis")]
    diag = Diagnostics()
    assert [r.record_id for r in filter_articles(recs, (2012, 2014), diag)] == ["1"]
    assert diag.count("missing_year") == 1


def test_query_string():
    req = HarvestRequest("ftunivalicante", 2012, 2014, fields=("dc:title", "dc:date"), page_size=1000)
    assert build_query(req) == (
        "func=PerformSearch&target=ftunivalicante&query=dcyear:[2012+TO+2014]&doctype:121"
        "&hits=1000&fields=dc:title,dc:date"
    )
    assert build_url(req, "http://h/s", 2000).endswith("&offset=2000")
    with pytest.raises(ValueError):
        HarvestRequest("t", 2015, 2012)


def test_pagination_with_one_transient_failure():
    records = corpus(2500)
    req = HarvestRequest("mock", 2012, 2014, page_size=1000)
    diag = Diagnostics()
    with scripted_endpoint(records, 1000, fail_once={1000}) as (url, requests):
        pages = fetch_all(url, req, retries=3, backoff=0, diagnostics=diag)
    ids = [r.record_id for p in pages for r in p.records]
    assert len(pages) == 3 and len(ids) == 2500 and len(set(ids)) == 2500
    assert diag.count("retry") == 1
    assert sorted(requests) == [0, 1000, 1000, 2000]


def test_parallel_pages_keep_offset_order():
    records = corpus(4500)
    req = HarvestRequest("mock", 2012, 2014, page_size=1000)
    with scripted_endpoint(records, 1000) as (url, _):
        pages = fetch_all(url, req, jobs=4, backoff=0)
    assert [p.offset for p in pages] == [0, 1000, 2000, 3000, 4000]
    assert [r.record_id for p in pages for r in p.records] == [r.record_id for r in records]


def test_retries_exhausted_names_target_and_offset():
    req = HarvestRequest("mock", 2012, 2014, page_size=1000)
    with scripted_endpoint(corpus(1500), 1000, fail_once={1000}) as (url, _):
        with pytest.raises(HarvestError) as info:
            fetch_all(url, req, retries=0, backoff=0)
    assert (info.value.target, info.value.offset) == ("mock", 1000)
    assert info.value.exit_code == 3


class _Script:
    target = "s"

    def __init__(self, pages):
        self.pages = pages

    def fetch(self, offset):
        return self.pages[offset]


def test_malformed_later_page_is_skipped_and_duplicates_dropped():
    recs = corpus(5, "s")
    script = _Script({
        0: serialize_dc(recs[:2], "s", total=6, offset=0),
        2: serialize_dc(recs[1:3], "s", total=6, offset=2),
        4: b"<results><record>",
    })
    diag = Diagnostics()
    pages = fetch_all(script, HarvestRequest("s", 2012, 2014, page_size=2), diagnostics=diag)
    assert [r.record_id for p in pages for r in p.records] == ["oai:s:0", "oai:s:1", "oai:s:2"]
    assert diag.count("malformed_page") == 1 and diag.count("duplicate_served") == 1


def test_malformed_first_page_is_fatal():
    with pytest.raises(HarvestError):
        fetch_all(_Script({0: b"<oops"}), HarvestRequest("s", 2012, 2014))


def test_fixture_source(tmp_path):
    (tmp_path / "t").mkdir()
    (tmp_path / "t" / "0.xml").write_bytes(serialize_dc(corpus(3, "t"), "t"))
    pages = fetch_all(tmp_path, HarvestRequest("t", 2012, 2014))
    assert sum(len(p.records) for p in pages) == 3
    with pytest.raises(HarvestError):
        FixtureSource(tmp_path, "missing").fetch(0)
