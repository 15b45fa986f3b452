import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from wernorm import (
    EvidenceSource,
    GraphemeRules,
    PivotDictionary,
    PronunciationLexicon,
    RelaxationTable,
    RemotePivotProvider,
)

from conftest import LEXICON, RELAX_PAIRS, TRANSLATIONS, TRANSLIT, write_lexicon, write_pivot, write_relax


class TestPronunciationLexicon:
    def test_lookup(self, tmp_path):
        path = tmp_path / "lex.tsv"
        write_lexicon(path, {"colour": "k ah l ah r", "color": "k ah l ah r"})
        lex = PronunciationLexicon.load(path)
        assert lex.lookup("colour") == (("k", "ah", "l", "ah", "r"),)
        assert lex.lookup("colour") == lex.lookup("color")

    def test_miss_returns_empty(self):
        assert PronunciationLexicon({}).lookup("absent") == ()

    def test_multi_pron_entries(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("either\tiy dh er\neither\tay dh er\n", encoding="utf-8")
        lex = PronunciationLexicon.load(path)
        assert lex.lookup("either") == (("iy", "dh", "er"), ("ay", "dh", "er"))

    def test_malformed_line_fails_at_load(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("word-without-tab\n", encoding="utf-8")
        with pytest.raises(ValueError, match="1"):
            PronunciationLexicon.load(path)

    def test_no_phones_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("word\t\n", encoding="utf-8")
        with pytest.raises(ValueError, match="1"):
            PronunciationLexicon.load(path)

    def test_rule_fallback_on_miss(self):
        rules = GraphemeRules({"c": "k", "a": "ah", "t": "t"})
        lex = PronunciationLexicon({"dog": "d ao g"}, rules=rules)
        assert lex.lookup("cat") == (("k", "ah", "t"),)
        assert lex.lookup("dog") == (("d", "ao", "g"),)


class TestGraphemeRules:
    def test_longest_match_wins(self):
        rules = GraphemeRules({"s": "s", "h": "hh", "sh": "sh"})
        assert rules.apply("sh") == ("sh",)
        assert rules.apply("hs") == ("hh", "s")

    def test_unmatched_char_gives_none(self):
        rules = GraphemeRules({"a": "ah"})
        assert rules.apply("ab") is None

    def test_silent_grapheme(self):
        rules = GraphemeRules({"a": "ah", "e": ""})
        assert rules.apply("ae") == ("ah",)


class TestRelaxationTable:
    def test_representative_idempotent(self):
        table = RelaxationTable(RELAX_PAIRS)
        for phone in ("oh", "ow", "iy", "ih", "uw", "uh", "zz"):
            rep = table.representative(phone)
            assert table.representative(rep) == rep

    def test_relax_preserves_length(self):
        table = RelaxationTable(RELAX_PAIRS)
        seq = ("dr", "oh", "m", "ay", "s", "tr", "ih", "k")
        assert len(table.relax(seq)) == len(seq)

    def test_table_two_pair_equivalence(self):
        table = RelaxationTable(RELAX_PAIRS)
        a = table.relax(("dr", "oh", "m", "ay", "s", "tr", "ih", "k"))
        b = table.relax(("dr", "ow", "m", "ay", "s", "tr", "ih", "k"))
        assert a == b

    def test_transitive_chain(self):
        table = RelaxationTable([("a", "b"), ("b", "c")])
        assert table.representative("a") == table.representative("c")

    def test_unknown_phone_self_map(self):
        table = RelaxationTable(RELAX_PAIRS)
        assert table.relax(("xx",)) == ("xx",)
        assert table.relax(()) == ()

    def test_load(self, tmp_path):
        path = tmp_path / "relax.txt"
        write_relax(path, RELAX_PAIRS)
        table = RelaxationTable.load(path)
        assert table.representative("ow") == table.representative("oh")

    def test_load_rejects_bad_line(self, tmp_path):
        path = tmp_path / "relax.txt"
        path.write_text("oh ow extra\n", encoding="utf-8")
        with pytest.raises(ValueError, match="1"):
            RelaxationTable.load(path)


class TestPivotDictionary:
    def test_lookup_and_miss(self, tmp_path):
        path = tmp_path / "dict.tsv"
        write_pivot(path, {"मैं": "main", "मेन": "main"})
        pivot = PivotDictionary.load(path)
        assert pivot.lookup("मैं") == "main"
        assert pivot.lookup("absent") is None

    def test_later_entry_overrides(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("w\tfirst\nw\tsecond\n", encoding="utf-8")
        assert PivotDictionary.load(path).lookup("w") == "second"

    def test_phrase_keys(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("आई वडील\tmother father\n", encoding="utf-8")
        assert PivotDictionary.load(path).lookup("आई वडील") == "mother father"

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "dict.tsv"
        path.write_text("nopivot\n", encoding="utf-8")
        with pytest.raises(ValueError, match="1"):
            PivotDictionary.load(path)


class _CountingProvider:
    def __init__(self, mapping):
        self.mapping = mapping
        self.calls = 0

    def lookup(self, word):
        self.calls += 1
        return self.mapping.get(word)


class TestEvidenceSource:
    def test_bundles_all_signals(self, example_evidence):
        record = example_evidence.evidence_for("colour")
        assert record.pronunciation == ("k", "ah", "l", "ah", "r")
        assert record.transliteration == "colour"
        assert record.translation == "colour"

    def test_all_absent(self):
        record = EvidenceSource().evidence_for("anything")
        assert record.pronunciations == ()
        assert record.transliteration is None
        assert record.translation is None

    def test_cache_prevents_repeat_lookups(self):
        provider = _CountingProvider({"w": "form"})
        source = EvidenceSource(transliterations=provider)
        first = source.evidence_for("w")
        second = source.evidence_for("w")
        assert first == second
        assert provider.calls == 1

    def test_pivot_normalization(self):
        source = EvidenceSource(translations={"w": "  Mother   Father "})
        assert source.translate("w") == "mother father"

    def test_pronunciation_match_uses_relaxation(self, example_evidence):
        assert example_evidence.pronunciation_match("डॉमेस्टिक", "डोमेस्टिक") is True
        assert example_evidence.pronunciation_match("मल्टीपल", "मल्टिपल") is True
        assert example_evidence.pronunciation_match("कम्प्यूटर", "कम्प्युटर") is True

    def test_pronunciation_match_distinguishes(self, example_evidence):
        assert example_evidence.pronunciation_match("अर्थ", "मीनिंग") is False

    def test_pronunciation_match_missing_is_none(self, example_evidence):
        assert example_evidence.pronunciation_match("colour", "nosuchword") is None

    def test_multi_pron_any_match(self):
        source = EvidenceSource(
            pronunciations={"a": ["x y", "p q"], "b": ["p q"], "c": ["m n"]}
        )
        assert source.pronunciation_match("a", "b") is True
        assert source.pronunciation_match("a", "c") is False

    def test_translate_phrase_whole_entry_wins(self):
        source = EvidenceSource(
            translations={"आई वडील": "parents", "आई": "mother", "वडील": "father"}
        )
        assert source.translate_phrase(("आई", "वडील")) == "parents"

    def test_translate_phrase_joins_tokens(self, example_evidence):
        assert example_evidence.translate_phrase(("आई", "वडील")) == "mother father"

    def test_translate_phrase_miss_if_any_token_missing(self, example_evidence):
        assert example_evidence.translate_phrase(("आई", "nosuchword")) is None

    def test_prefetch_uses_batches(self):
        class BatchingProvider:
            def __init__(self):
                self.batch_calls = 0

            def lookup(self, word):
                raise AssertionError("prefetch should use lookup_batch")

            def lookup_batch(self, words):
                self.batch_calls += 1
                return {w: w.upper() for w in words}

        provider = BatchingProvider()
        source = EvidenceSource(transliterations=provider)
        source.prefetch(["a", "b", "c"])
        assert provider.batch_calls == 1
        assert source.transliterate("a") == "a"  # pivot forms are case-folded


class _PivotHandler(BaseHTTPRequestHandler):
    mapping = {}
    fail_times = 0
    requests_seen = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).requests_seen.append((body, self.headers.get("Authorization")))
        if type(self).fail_times > 0:
            type(self).fail_times -= 1
            self.send_error(500, "transient")
            return
        results = {w: self.mapping.get(w) for w in body["words"]}
        payload = json.dumps({"results": results}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def pivot_server():
    _PivotHandler.mapping = {"मैं": "Main", "ही": "hi"}
    _PivotHandler.fail_times = 0
    _PivotHandler.requests_seen = []
    server = HTTPServer(("127.0.0.1", 0), _PivotHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", _PivotHandler
    server.shutdown()
    thread.join()


class TestRemotePivotProvider:
    def test_batch_lookup(self, pivot_server):
        endpoint, handler = pivot_server
        provider = RemotePivotProvider(endpoint, api_key="sekrit", mode="transliterate")
        results = provider.lookup_batch(["मैं", "unknown"])
        assert results == {"मैं": "Main", "unknown": None}
        body, auth = handler.requests_seen[0]
        assert body["mode"] == "transliterate"
        assert body["pivot"] == "en"
        assert auth == "Bearer sekrit"

    def test_single_lookup(self, pivot_server):
        endpoint, _ = pivot_server
        provider = RemotePivotProvider(endpoint)
        assert provider.lookup("ही") == "hi"
        assert provider.lookup("missing") is None

    def test_retry_then_succeed(self, pivot_server):
        endpoint, handler = pivot_server
        handler.fail_times = 2
        provider = RemotePivotProvider(endpoint, retries=3)
        assert provider.lookup("ही") == "hi"

    def test_degrades_to_miss_after_retries(self, pivot_server, caplog):
        endpoint, handler = pivot_server
        handler.fail_times = 10
        provider = RemotePivotProvider(endpoint, retries=2)
        with caplog.at_level("WARNING"):
            assert provider.lookup("ही") is None
        assert any("failed" in rec.message for rec in caplog.records)

    def test_disables_after_repeated_failures(self, pivot_server):
        endpoint, handler = pivot_server
        handler.fail_times = 100
        provider = RemotePivotProvider(endpoint, retries=1, max_failures=2)
        provider.lookup("a")
        provider.lookup("b")
        seen_before = len(handler.requests_seen)
        provider.lookup("c")  # disabled: no request goes out
        assert len(handler.requests_seen) == seen_before

    def test_unreachable_endpoint_is_a_miss(self):
        provider = RemotePivotProvider("http://127.0.0.1:1/none", retries=1, timeout=0.2)
        assert provider.lookup("w") is None

    def test_works_as_evidence_provider(self, pivot_server):
        endpoint, _ = pivot_server
        source = EvidenceSource(
            transliterations=RemotePivotProvider(endpoint, mode="transliterate")
        )
        assert source.transliterate("मैं") == "main"  # case-folded on arrival


def test_example_dicts_cover_documented_words(example_evidence):
    """The fixture dictionaries encode the documented signal agreements."""
    assert example_evidence.pronounce("करता") == example_evidence.pronounce("कर्ता")
    assert example_evidence.translate("करता") != example_evidence.translate("कर्ता")
    assert example_evidence.translate("अर्थ") == example_evidence.translate("मीनिंग")
    assert example_evidence.pronunciation_match("अर्थ", "मीनिंग") is False
    assert example_evidence.transliterate("मैं") == example_evidence.transliterate("मेन")
    assert example_evidence.transliterate("ही") == example_evidence.transliterate("हाई")
    assert example_evidence.translate("स्टुडियो") == "studio"
    assert example_evidence.translate("स्टुडिओ") == "studio"
