"""Live HTTP path exercised against a local loopback server."""

import socket
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from sourcescope.errors import (
    BodyTooLargeError,
    FetchTimeoutError,
    NetworkUnreachableError,
    NonHtmlContentError,
    TooManyRedirectsError,
)
from sourcescope.features import FetchPolicy, default_lexicon, fetch_site

LANDING = """<!DOCTYPE html><html><head><title>live</title></head><body>
<a href="/contact.html">Contact us</a>
<a href="/about.html">About us</a>
<a href="http://elsewhere.example/terms.html">offsite terms</a>
<p>landing body</p>
</body></html>"""

CONTACT = """<!DOCTYPE html><html><body><p>phone: 555 010 3344</p></body></html>"""
ABOUT = """<!DOCTYPE html><html><body><h4>who we are</h4></body></html>"""


class Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _send_html(self, body: str, content_type="text/html; charset=utf-8"):
        payload = body.encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        if self.path == "/":
            self._send_html(LANDING)
        elif self.path == "/contact.html":
            self._send_html(CONTACT)
        elif self.path == "/about.html":
            self._send_html(ABOUT)
        elif self.path.startswith("/hop/"):
            n = int(self.path.rsplit("/", 1)[1])
            target = "/" if n == 0 else f"/hop/{n - 1}"
            self.send_response(302)
            self.send_header("Location", target)
            self.end_headers()
        elif self.path == "/loop":
            self.send_response(302)
            self.send_header("Location", "/loop")
            self.end_headers()
        elif self.path == "/pdf":
            self._send_html("%PDF-1.4 not really html", content_type="application/pdf")
        elif self.path == "/huge":
            self._send_html("<html>" + "x" * 5000 + "</html>")
        elif self.path == "/slow":
            import time
            time.sleep(2.0)
            self._send_html("<html>late</html>")
        elif self.path == "/missing":
            self.send_response(404)
            self.end_headers()
        else:
            self.send_response(404)
            self.end_headers()


@pytest.fixture(scope="module")
def server():
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}"
    httpd.shutdown()


class TestLiveFetch:
    def test_landing_plus_candidates(self, server):
        snap = fetch_site(f"{server}/", FetchPolicy(timeout=5))
        urls = [url for url, _ in snap.pages]
        assert snap.pages[0][0] == f"{server}/"
        # both same-host candidates fetched, offsite link skipped
        assert f"{server}/contact.html" in urls
        assert f"{server}/about.html" in urls
        assert len(urls) == 3
        assert snap.final_scheme_secure is False

    def test_redirects_followed_within_budget(self, server):
        snap = fetch_site(f"{server}/hop/3", FetchPolicy(timeout=5, max_redirects=5))
        assert snap.final_url == f"{server}/"

    def test_too_many_redirects(self, server):
        with pytest.raises(TooManyRedirectsError):
            fetch_site(f"{server}/hop/6", FetchPolicy(timeout=5, max_redirects=5))
        with pytest.raises(TooManyRedirectsError):
            fetch_site(f"{server}/loop", FetchPolicy(timeout=5, max_redirects=5))

    def test_non_html_content(self, server):
        with pytest.raises(NonHtmlContentError):
            fetch_site(f"{server}/pdf", FetchPolicy(timeout=5))

    def test_body_too_large(self, server):
        with pytest.raises(BodyTooLargeError):
            fetch_site(f"{server}/huge", FetchPolicy(timeout=5, max_body_bytes=1024))

    def test_timeout(self, server):
        with pytest.raises(FetchTimeoutError):
            fetch_site(f"{server}/slow", FetchPolicy(timeout=0.3))

    def test_http_error_status(self, server):
        with pytest.raises(NetworkUnreachableError):
            fetch_site(f"{server}/missing", FetchPolicy(timeout=5))

    def test_unreachable_port(self):
        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
        sock.close()  # nothing listens here now
        with pytest.raises(NetworkUnreachableError):
            fetch_site(f"http://127.0.0.1:{port}/", FetchPolicy(timeout=2))

    def test_secondary_page_budget(self, server):
        policy = FetchPolicy(timeout=5, max_secondary_pages=1)
        snap = fetch_site(f"{server}/", policy)
        assert len(snap.pages) == 2

    def test_errors_name_the_url(self, server):
        with pytest.raises(NonHtmlContentError) as excinfo:
            fetch_site(f"{server}/pdf", FetchPolicy(timeout=5))
        assert "/pdf" in str(excinfo.value)
        assert excinfo.value.url.endswith("/pdf")


class TestOfflineFidelity:
    def test_saved_pages_reproduce_the_live_bits(self, server, tmp_path):
        """Saving a live snapshot as a fixture yields the same feature bits."""
        import json

        from sourcescope.features import features_from_snapshot

        live = fetch_site(f"{server}/", FetchPolicy(timeout=5))
        live_bits = features_from_snapshot(live).as_dict()

        site = tmp_path / "saved.test"
        site.mkdir()
        (site / "index.html").write_text(live.pages[0][1], encoding="utf-8")
        names = []
        for i, (_, html) in enumerate(live.pages[1:], start=1):
            name = f"page{i}.html"
            (site / name).write_text(html, encoding="utf-8")
            names.append(name)
        (site / "manifest.json").write_text(json.dumps({
            "final_scheme_secure": live.final_scheme_secure,
            "secondary_pages": names,
        }), encoding="utf-8")

        offline = fetch_site("http://saved.test", FetchPolicy(offline_root=tmp_path))
        offline_bits = features_from_snapshot(offline).as_dict()
        assert offline_bits == live_bits
        # the landing page's "offsite terms" anchor text sets the terms bit
        assert live_bits == {"padlock": 0, "contact": 1, "telephone": 1,
                             "about": 1, "terms": 1}
