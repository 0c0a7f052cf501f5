import http.server
import json
import socket
import socketserver
import threading
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdoval.annotation import (
    AnnotationNode,
    HttpError,
    Literal,
    NetworkError,
    SyntaxViolation,
    extract_from_html,
    fetch_page,
    parse_annotation,
)


class TestParseAnnotation:
    def test_listing_fixture_shape(self, moosleite_root):
        root = moosleite_root
        assert root.type_name == "LodgingBusiness"
        assert set(root.properties) == {"url", "address", "name", "description", "geo"}
        assert len(root.properties["url"]) == 2
        assert root.properties["name"] == (Literal("string", "Moosleite"),)
        address = root.properties["address"][0]
        assert isinstance(address, AnnotationNode)
        assert address.type_name == "PostalAddress"
        assert address.properties["addressCountry"] == (Literal("string", "AT"),)

    def test_minimal_annotation(self):
        root = parse_annotation(b'{"@context":"http://schema.org","@type":"Thing"}')
        assert root.type_name == "Thing"
        assert root.properties == {}

    def test_multi_typed_rejected(self):
        with pytest.raises(SyntaxViolation) as err:
            parse_annotation(b'{"@type":["Room","Product"],"name":"x"}')
        assert err.value.code == "MultiTypedEntity"

    def test_single_element_type_array_ok(self):
        root = parse_annotation(b'{"@type":["Room"]}')
        assert root.type_name == "Room"

    def test_bad_context(self):
        with pytest.raises(SyntaxViolation) as err:
            parse_annotation(b'{"@context":"http://example.org","@type":"Thing"}')
        assert err.value.code == "BadContext"

    @pytest.mark.parametrize(
        "context",
        ["http://schema.org", "https://schema.org/", "HTTP://SCHEMA.ORG", "https://schema.org"],
    )
    def test_context_scheme_and_slash_insensitive(self, context):
        parse_annotation(json.dumps({"@context": context, "@type": "Thing"}))

    def test_missing_type_with_path(self):
        with pytest.raises(SyntaxViolation) as err:
            parse_annotation(b'{"@type":"Hotel","address":{"postalCode":"6290"}}')
        assert err.value.code == "MissingType"
        assert err.value.source_path == "/address"

    def test_json_error_has_position(self):
        with pytest.raises(SyntaxViolation) as err:
            parse_annotation(b'{"@type": "Hotel",}')
        assert err.value.code == "JsonError"
        assert err.value.line == 1
        assert err.value.column is not None

    def test_bare_id_reference_rejected(self):
        with pytest.raises(SyntaxViolation) as err:
            parse_annotation(b'{"@type":"Hotel","geo":{"@id":"#somewhere"}}')
        assert err.value.code == "UnresolvedReference"

    def test_id_kept_as_metadata(self):
        root = parse_annotation(b'{"@type":"Hotel","@id":"#h1","name":"x"}')
        assert root.node_id == "#h1"
        assert set(root.properties) == {"name"}

    def test_value_list_normalization(self):
        single = parse_annotation(b'{"@type":"Hotel","url":"http://x.com/a"}')
        listed = parse_annotation(b'{"@type":"Hotel","url":["http://x.com/a"]}')
        assert single.properties["url"] == listed.properties["url"]

    def test_numbers_keep_source_precision(self):
        root = parse_annotation(b'{"@type":"GeoCoordinates","latitude":47.1862746335978,"longitude":1e3,"elevation":0.10}')
        assert root.properties["latitude"] == (Literal("number", "47.1862746335978"),)
        assert root.properties["longitude"] == (Literal("number", "1e3"),)
        assert root.properties["elevation"] == (Literal("number", "0.10"),)

    def test_booleans(self):
        root = parse_annotation(b'{"@type":"Place","smokingAllowed":true}')
        assert root.properties["smokingAllowed"] == (Literal("boolean", "true"),)

    def test_null_and_empty_list_mean_absent(self):
        root = parse_annotation(b'{"@type":"Hotel","name":null,"url":[],"geo":[null]}')
        assert root.properties == {}

    def test_nested_arrays_flattened(self):
        root = parse_annotation(b'{"@type":"Hotel","url":[["http://a.com/"],["http://b.com/"]]}')
        assert len(root.properties["url"]) == 2

    def test_non_object_root(self):
        with pytest.raises(SyntaxViolation) as err:
            parse_annotation(b'"just a string"')
        assert err.value.code == "MissingType"

    @settings(max_examples=300, deadline=None)
    @given(st.binary(max_size=120))
    def test_total_over_bytes(self, data):
        try:
            result = parse_annotation(data)
            assert isinstance(result, AnnotationNode)
        except SyntaxViolation:
            pass

    @settings(max_examples=150, deadline=None)
    @given(
        st.recursive(
            st.one_of(st.text(max_size=8), st.integers(), st.booleans(), st.none()),
            lambda children: st.one_of(
                st.lists(children, max_size=3),
                st.dictionaries(st.text(max_size=6), children, max_size=3),
            ),
            max_leaves=12,
        )
    )
    def test_total_over_json_documents(self, doc):
        try:
            result = parse_annotation(json.dumps(doc))
            assert isinstance(result, AnnotationNode)
        except SyntaxViolation:
            pass


class TestExtract:
    def test_two_blocks_second_malformed(self):
        page = b"""
        <html><body>
        <script type="application/ld+json">{"@type":"Hotel","name":"A"}</script>
        <p>filler</p>
        <script type="application/ld+json">{oops</script>
        </body></html>
        """
        blocks = extract_from_html(page)
        assert [b.index for b in blocks] == [0, 1]
        assert isinstance(blocks[0].parse_result, AnnotationNode)
        assert isinstance(blocks[1].parse_result, SyntaxViolation)

    def test_no_blocks(self):
        assert extract_from_html(b"<html><body><p>nothing</p></body></html>") == []

    def test_other_script_types_skipped(self):
        page = b'<script type="text/javascript">var x = 1;</script>'
        assert extract_from_html(page) == []

    def test_attribute_order_and_case_tolerated(self):
        page = (
            b'<SCRIPT id="x" TYPE="APPLICATION/LD+JSON" data-y="1">'
            b'{"@type":"Hotel"}</SCRIPT>'
        )
        blocks = extract_from_html(page)
        assert len(blocks) == 1
        assert blocks[0].parse_result.type_name == "Hotel"

    def test_fixture_page_matches_direct_parse(self, moosleite_bytes):
        page = (
            b'<html><head><script type="application/ld+json">'
            + moosleite_bytes
            + b"</script></head><body></body></html>"
        )
        blocks = extract_from_html(page)
        assert len(blocks) == 1
        assert blocks[0].parse_result == parse_annotation(moosleite_bytes)


@pytest.fixture(scope="module")
def http_fixture_server():
    class Handler(http.server.BaseHTTPRequestHandler):
        def do_GET(self):
            if self.path == "/page":
                body = b"<html><body>fixture</body></html>"
                self.send_response(200)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
            else:
                self.send_error(404)

        def log_message(self, *args):
            pass

    server = socketserver.TCPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestFetch:
    def test_fetch_body(self, http_fixture_server):
        assert fetch_page(f"{http_fixture_server}/page") == b"<html><body>fixture</body></html>"

    def test_404_raises_http_error(self, http_fixture_server):
        with pytest.raises(HttpError) as err:
            fetch_page(f"{http_fixture_server}/missing")
        assert err.value.status == 404

    def test_timeout_is_network_error(self):
        # a server that accepts and never answers forces the read timeout
        listener = socket.socket()
        listener.bind(("127.0.0.1", 0))
        listener.listen(1)
        port = listener.getsockname()[1]
        try:
            started = time.monotonic()
            with pytest.raises(NetworkError):
                fetch_page(f"http://127.0.0.1:{port}/", timeout=1.0)
            assert time.monotonic() - started < 2.5
        finally:
            listener.close()

    def test_non_http_scheme_rejected(self):
        with pytest.raises(ValueError):
            fetch_page("ftp://example.com/x")
