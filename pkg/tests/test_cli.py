import shutil
import subprocess
import sys

import pytest

from wernorm import EvaluationReport, load_corpus, read_report, write_report
from wernorm.cli import main
from wernorm.pipeline import NORMALIZED_CORPUS, REPORT_JSON, SEG_REVIEW_FILE, SPELL_REVIEW_FILE

from conftest import write_corpus_tsv

BABBLE = "आई वडील ऑल वेज़"
ROWS = (
    [(f"b{i:02d}", BABBLE, BABBLE) for i in range(8)]
    + [
        ("split1", "आईवडील", "आई वडील"),
        ("var1", "colour", "color"),
    ]
)


@pytest.fixture
def corpus_path(tmp_path):
    path = tmp_path / "corpus.tsv"
    write_corpus_tsv(path, ROWS)
    return path


def provider_args(example_files):
    return [
        "--lexicon", str(example_files["lexicon"]),
        "--translit-dict", str(example_files["translit"]),
        "--trans-dict", str(example_files["trans"]),
        "--relax-table", str(example_files["relax"]),
    ]


class TestEvaluate:
    def test_full_run(self, corpus_path, example_files, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(
            ["evaluate", "--corpus", str(corpus_path), "--locale", "hi", "--out", str(out)]
            + provider_args(example_files)
        )
        assert code == 0
        stdout = capsys.readouterr().out
        assert stdout.splitlines()[0].startswith("Lang")
        assert stdout.splitlines()[1].startswith("hi")
        report = read_report(out / REPORT_JSON)
        assert report.cascade_wer == 0.0
        normalized = load_corpus(out / NORMALIZED_CORPUS)
        assert all(u.reference == u.hypothesis for u in normalized)

    def test_order_flag(self, corpus_path, example_files, tmp_path):
        out = tmp_path / "out"
        code = main(
            ["evaluate", "--corpus", str(corpus_path), "--out", str(out),
             "--order", "spell-only"]
            + provider_args(example_files)
        )
        assert code == 0
        report = read_report(out / REPORT_JSON)
        assert report.seg_wer is None
        assert report.spell_wer is not None


class TestMineSpell:
    def test_writes_review_file(self, corpus_path, example_files, tmp_path, capsys):
        out = tmp_path / "mined"
        code = main(
            ["mine-spell", "--corpus", str(corpus_path), "--out", str(out)]
            + provider_args(example_files)
        )
        assert code == 0
        assert "accepted 1" in capsys.readouterr().out
        lines = (out / SPELL_REVIEW_FILE).read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("word_a\t")
        assert len(lines) == 2
        assert lines[1].startswith("color\tcolour\t")


class TestMineSeg:
    def test_writes_review_file(self, corpus_path, example_files, tmp_path, capsys):
        out = tmp_path / "mined"
        code = main(
            ["mine-seg", "--corpus", str(corpus_path), "--out", str(out)]
            + provider_args(example_files)
        )
        assert code == 0
        assert "accepted 1" in capsys.readouterr().out
        lines = (out / SEG_REVIEW_FILE).read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("compound\t")
        assert lines[1].startswith("आईवडील\tआई वडील\t")


class TestNormalize:
    def _mined_reviews(self, corpus_path, example_files, tmp_path):
        out = tmp_path / "mined"
        main(
            ["mine-spell", "--corpus", str(corpus_path), "--out", str(out)]
            + provider_args(example_files)
        )
        main(
            ["mine-seg", "--corpus", str(corpus_path), "--out", str(out)]
            + provider_args(example_files)
        )
        return out / SPELL_REVIEW_FILE, out / SEG_REVIEW_FILE

    def test_applies_both_pair_files(self, corpus_path, example_files, tmp_path):
        spell, seg = self._mined_reviews(corpus_path, example_files, tmp_path)
        out = tmp_path / "norm"
        code = main(
            ["normalize", "--corpus", str(corpus_path), "--out", str(out),
             "--spell-pairs", str(spell), "--seg-pairs", str(seg)]
        )
        assert code == 0
        normalized = {u.id: u for u in load_corpus(out / NORMALIZED_CORPUS)}
        assert normalized["split1"].hypothesis == ("आईवडील",)
        assert normalized["var1"].hypothesis == ("colour",)

    def test_reject_verdict_excludes_pair(self, corpus_path, example_files, tmp_path):
        spell, _ = self._mined_reviews(corpus_path, example_files, tmp_path)
        lines = spell.read_text(encoding="utf-8").splitlines()
        lines[1] += "\treject"
        spell.write_text("\n".join(lines) + "\n", encoding="utf-8")
        out = tmp_path / "norm"
        code = main(
            ["normalize", "--corpus", str(corpus_path), "--out", str(out),
             "--spell-pairs", str(spell)]
        )
        assert code == 0
        normalized = {u.id: u for u in load_corpus(out / NORMALIZED_CORPUS)}
        assert normalized["var1"].hypothesis == ("color",)

    def test_requires_a_pair_file(self, corpus_path, tmp_path, capsys):
        code = main(
            ["normalize", "--corpus", str(corpus_path), "--out", str(tmp_path / "norm")]
        )
        assert code == 2
        assert "wernorm: error:" in capsys.readouterr().err


class TestReport:
    def test_aggregates_runs(self, tmp_path, capsys):
        paths = []
        for locale, cascade in (("hi", 15.0), ("mr", 9.0)):
            report = EvaluationReport(locale, 1, 10, base_wer=20.0, cascade_wer=cascade)
            path = tmp_path / f"{locale}.json"
            write_report(report, path)
            paths.append(str(path))
        code = main(["report"] + paths)
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[1].startswith("hi")
        assert out.splitlines()[2].startswith("mr")
        assert "Mean cascade WERR:" in out


class TestErrors:
    def test_missing_corpus_exits_2(self, tmp_path, capsys):
        code = main(
            ["evaluate", "--corpus", str(tmp_path / "nope.tsv"), "--out", str(tmp_path / "o")]
        )
        assert code == 2
        assert "wernorm: error:" in capsys.readouterr().err

    def test_unknown_command_exits_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2


class TestEntryPoints:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "wernorm", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "usage: wernorm" in proc.stdout

    def test_console_script_installed(self):
        exe = shutil.which("wernorm")
        assert exe is not None
        proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
