"""CLI: subcommands, exit codes, fixed filenames, idempotence."""

import csv
import json

import pytest

from citnorm.cli import main


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main(
        [
            "synth",
            "--preset",
            "two-cultures",
            "--papers-per-field-year",
            "150",
            "--seed",
            "42",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    return out


def test_synth_outputs(synth_dir):
    for name in ("publications.tsv", "references.tsv", "recommendations.tsv", "run_meta.json"):
        assert (synth_dir / name).exists()
    meta = json.loads((synth_dir / "run_meta.json").read_text())
    assert meta["subcommand"] == "synth"
    assert meta["config"]["seed"] == 42
    assert meta["summary"]["n_publications"] > 0


def test_synth_reproducible(synth_dir, tmp_path):
    out2 = tmp_path / "again"
    assert (
        main(
            [
                "synth",
                "--preset",
                "two-cultures",
                "--papers-per-field-year",
                "150",
                "--seed",
                "42",
                "--out",
                str(out2),
            ]
        )
        == 0
    )
    for name in ("publications.tsv", "references.tsv", "recommendations.tsv"):
        assert (out2 / name).read_bytes() == (synth_dir / name).read_bytes()


def test_validate_clean(synth_dir, capsys):
    code = main(
        [
            "validate",
            str(synth_dir / "publications.tsv"),
            str(synth_dir / "references.tsv"),
            "--json",
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["warnings"] == []
    assert report["n_publications"] > 0


def test_validate_duplicate_id_exit_1(tmp_path, capsys):
    pubs = tmp_path / "pubs.tsv"
    pubs.write_text(
        "pub_id\tyear\tjournal_id\tdoc_type\tcategories\n"
        "P1\t2008\tJ\tarticle\tX\nP1\t2009\tJ\tarticle\tX\n"
    )
    refs = tmp_path / "refs.tsv"
    refs.write_text("citing_id\tcited_id\n")
    code = main(["validate", str(pubs), str(refs)])
    assert code == 1
    assert "P1" in capsys.readouterr().err


def test_validate_year_anomaly_warns_exit_0(tmp_path, capsys):
    pubs = tmp_path / "pubs.tsv"
    pubs.write_text(
        "pub_id\tyear\tjournal_id\tdoc_type\tcategories\n"
        "OLD\t2009\tJ\tarticle\tX\nNEW\t2010\tJ\tarticle\tX\n"
    )
    refs = tmp_path / "refs.tsv"
    refs.write_text("citing_id\tcited_id\nOLD\tNEW\n")
    code = main(["validate", str(pubs), str(refs), "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["warnings"]) == 1


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--preset", "two-cultures", "--out", "/tmp/x"])  # no --seed
    assert exc.value.code == 2


@pytest.fixture(scope="module")
def compute_dir(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("compute")
    code = main(
        [
            "compute",
            str(synth_dir / "publications.tsv"),
            str(synth_dir / "references.tsv"),
            "--out",
            str(out),
            "--dump-refsets",
        ]
    )
    assert code == 0
    return out


def test_compute_outputs(compute_dir):
    assert (compute_dir / "indicators.csv").exists()
    assert (compute_dir / "indicators.jsonl").exists()
    assert (compute_dir / "refsets.csv").exists()
    with open(compute_dir / "indicators.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header[:10] == [
        "pub_id", "citations_3y", "mncs", "incites", "hazen",
        "p100", "p100_prime", "sncs1", "sncs2", "sncs3",
    ]
    assert header[10:] == [f"z_{c}" for c in header[1:10]]
    meta = json.loads((compute_dir / "run_meta.json").read_text())
    assert meta["config"]["corpus"]["horizon_year"] == 2010  # defaulted to max year


def test_compute_idempotent(synth_dir, compute_dir, tmp_path):
    out2 = tmp_path / "again"
    main(
        [
            "compute",
            str(synth_dir / "publications.tsv"),
            str(synth_dir / "references.tsv"),
            "--out",
            str(out2),
        ]
    )
    assert (out2 / "indicators.csv").read_bytes() == (compute_dir / "indicators.csv").read_bytes()
    assert (out2 / "indicators.jsonl").read_bytes() == (compute_dir / "indicators.jsonl").read_bytes()


def test_compute_indicator_subset(synth_dir, tmp_path):
    out = tmp_path / "subset"
    code = main(
        [
            "compute",
            str(synth_dir / "publications.tsv"),
            str(synth_dir / "references.tsv"),
            "--indicators",
            "mncs,hazen",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    with open(out / "indicators.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header == ["pub_id", "mncs", "hazen", "z_mncs", "z_hazen"]


def test_compute_unknown_indicator_exit_1(synth_dir, tmp_path, capsys):
    code = main(
        [
            "compute",
            str(synth_dir / "publications.tsv"),
            str(synth_dir / "references.tsv"),
            "--indicators",
            "nope",
            "--out",
            str(tmp_path / "x"),
        ]
    )
    assert code == 1
    assert "unknown indicator" in capsys.readouterr().err


def test_evaluate_outputs(synth_dir, compute_dir, tmp_path):
    out = tmp_path / "eval"
    code = main(
        [
            "evaluate",
            "--table",
            str(compute_dir / "indicators.csv"),
            "--recs",
            str(synth_dir / "recommendations.tsv"),
            "--reps",
            "30",
            "--seed",
            "5",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    report = json.loads((out / "evaluation.json").read_text())
    assert len(report["correlations"]) == 9
    assert report["metadata"]["n_first"] < report["metadata"]["n_all"]
    for fit in report["regressions"].values():
        assert set(fit["coef"]) == {"constant", "very_good", "excellent"}
    with open(out / "margins.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["indicator"] for r in rows} == set(report["correlations"])
    assert list(rows[0]) == ["level", "margin", "ci_low", "ci_high", "indicator"]
    assert "reference category" in (out / "evaluation.txt").read_text()


def test_evaluate_thread_invariant(synth_dir, compute_dir, tmp_path):
    out1, out2 = tmp_path / "t1", tmp_path / "t2"
    for out, threads in ((out1, "1"), (out2, "4")):
        main(
            [
                "evaluate",
                "--table",
                str(compute_dir / "indicators.csv"),
                "--recs",
                str(synth_dir / "recommendations.tsv"),
                "--reps",
                "30",
                "--seed",
                "5",
                "--threads",
                threads,
                "--out",
                str(out),
            ]
        )
    j1 = json.loads((out1 / "evaluation.json").read_text())
    j2 = json.loads((out2 / "evaluation.json").read_text())
    j1["metadata"].pop("threads", None), j2["metadata"].pop("threads", None)
    assert j1 == j2


def test_category_stats(synth_dir, tmp_path):
    out = tmp_path / "cats"
    code = main(
        [
            "category-stats",
            str(synth_dir / "publications.tsv"),
            str(synth_dir / "references.tsv"),
            "--top-k",
            "1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    with open(out / "category_stats.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert list(rows[0]) == ["category", "mean", "min", "max", "n"]


def test_synth_from_spec_file(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(
        json.dumps(
            {
                "fields": [
                    {
                        "label": "f1",
                        "mean_citations": 4.0,
                        "dispersion": 1.0,
                        "mean_linked_refs": 6.0,
                        "linked_ref_share": 0.8,
                    }
                ],
                "year_min": 2008,
                "year_max": 2009,
                "papers_per_field_year": 80,
                "journals_per_field": 3,
                "coupling": 0.5,
            }
        )
    )
    out = tmp_path / "out"
    code = main(["synth", "--spec", str(spec_path), "--seed", "3", "--out", str(out)])
    assert code == 0
    assert (out / "publications.tsv").exists()
