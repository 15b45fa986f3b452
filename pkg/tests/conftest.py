"""Shared fixtures: evidence dictionaries for the documented example words.

The dictionaries below encode the motivating examples from the README:
equal-pronunciation spelling variants, homophones split by translation,
transliteration false-friends, and compound splits that pass or fail the
pronunciation/translation checks.
"""

import pytest

from wernorm import EvidenceSource, RelaxationTable

LEXICON = {
    "colour": ["k ah l ah r"],
    "color": ["k ah l ah r"],
    "करता": ["k ah r t a"],
    "कर्ता": ["k ah r t a"],
    "अर्थ": ["ah r th"],
    "मीनिंग": ["m iy n ih ng"],
    "डॉमेस्टिक": ["dr oh m ay s tr ih k"],
    "डोमेस्टिक": ["dr ow m ay s tr ih k"],
    "मल्टीपल": ["m ah l t iy p ah l"],
    "मल्टिपल": ["m ah l t ih p ah l"],
    "कम्प्यूटर": ["k ah m p y uw t ah r"],
    "कम्प्युटर": ["k ah m p y uh t ah r"],
    "स्टुडियो": ["s t uh d iy o"],
    "स्टुडिओ": ["s t uh d iy o"],
    "गांव": ["g aa o n"],
    "गाँव": ["g aa o n"],
    "मैं": ["m ay n"],
    "मेन": ["m ey n"],
    "ही": ["h iy"],
    "हाई": ["h aa iy"],
    "subscription": ["s ah b s k r ih p sh ah n"],
    "subscript": ["s ah b s k r ih p t"],
    "ion": ["ay ah n"],
    "Nehruji": ["n eh hr uw jh iy"],
    "Nehru": ["n eh hr uw"],
    "ji": ["jh iy"],
    "ऑलवेज़": ["ao l v ey z"],
    "ऑल": ["ao l"],
    "वेज़": ["v ey z"],
    "आईवडील": ["aa iy v ah d iy l"],
    "आई": ["aa iy"],
    "वडील": ["v ah d iy l"],
}

TRANSLIT = {
    "colour": "colour",
    "color": "colour",
    "करता": "karta",
    "कर्ता": "karta",
    "अर्थ": "arth",
    "मीनिंग": "meaning",
    "डॉमेस्टिक": "domestic",
    "डोमेस्टिक": "domestic",
    "मल्टीपल": "multiple",
    "मल्टिपल": "multiple",
    "कम्प्यूटर": "computer",
    "कम्प्युटर": "computer",
    "स्टुडियो": "studio",
    "स्टुडिओ": "studio",
    "गांव": "gaon",
    "गाँव": "gaon",
    "मैं": "main",
    "मेन": "main",
    "ही": "hi",
    "हाई": "hi",
}

TRANSLATIONS = {
    "colour": "colour",
    "color": "colour",
    "करता": "does",
    "कर्ता": "doer",
    "अर्थ": "meaning",
    "मीनिंग": "meaning",
    "डॉमेस्टिक": "domestic",
    "डोमेस्टिक": "domestic",
    "मल्टीपल": "multiple",
    "मल्टिपल": "multiple",
    "कम्प्यूटर": "computer",
    "कम्प्युटर": "computer",
    "स्टुडियो": "studio",
    "स्टुडिओ": "studio",
    "गांव": "village",
    "गाँव": "village",
    "मैं": "i",
    "मेन": "main",
    "ही": "only",
    "हाई": "high",
    "subscription": "subscription",
    "subscript": "subscript",
    "ion": "ion",
    "ऑलवेज़": "always",
    "ऑल": "all",
    "वेज़": "ways",
    "आईवडील": "mother father",
    "आई": "mother",
    "वडील": "father",
}

RELAX_PAIRS = [("oh", "ow"), ("iy", "ih"), ("uw", "uh")]


@pytest.fixture
def example_evidence() -> EvidenceSource:
    return EvidenceSource(
        pronunciations=LEXICON,
        transliterations=TRANSLIT,
        translations=TRANSLATIONS,
        relaxation=RelaxationTable(RELAX_PAIRS),
    )


def write_lexicon(path, entries) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, prons in entries.items():
            if isinstance(prons, str):
                prons = [prons]
            for pron in prons:
                fh.write(f"{word}\t{pron}\n")


def write_pivot(path, mapping) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word, pivot in mapping.items():
            fh.write(f"{word}\t{pivot}\n")


def write_relax(path, pairs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in pairs:
            fh.write(f"{a} {b}\n")


def write_corpus_tsv(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for utt_id, ref, hyp in rows:
            fh.write(f"{utt_id}\t{ref}\t{hyp}\n")


@pytest.fixture
def example_files(tmp_path):
    """The example dictionaries written out in their on-disk formats."""
    paths = {
        "lexicon": tmp_path / "lexicon.tsv",
        "translit": tmp_path / "translit.tsv",
        "trans": tmp_path / "trans.tsv",
        "relax": tmp_path / "relax.txt",
    }
    write_lexicon(paths["lexicon"], LEXICON)
    write_pivot(paths["translit"], TRANSLIT)
    write_pivot(paths["trans"], TRANSLATIONS)
    write_relax(paths["relax"], RELAX_PAIRS)
    return paths
