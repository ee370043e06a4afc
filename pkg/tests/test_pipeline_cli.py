import json
import shutil

import pytest
import yaml

from oa_audit.cli import main
from oa_audit.errors import ConfigError
from oa_audit.harvest import parse_page, serialize_dc
from oa_audit.metrics import read_report_csv, read_report_json
from oa_audit.pipeline import AuditConfig, run_audit

from _runs import cli_args, read_tree
from _tables import GOV, INST


@pytest.fixture(scope="module")
def small_run(small_golden, tmp_path_factory):
    out = tmp_path_factory.mktemp("small_run")
    assert main(["run", *cli_args(small_golden, out)]) == 0
    return out


def test_run_reproduces_reference_rows(small_run):
    rows = {r["acronym"]: r for r in read_report_csv(small_run / "compliance.csv")}
    assert sorted(rows) == ["UPO", "UVIC"]
    for acronym, row in rows.items():
        total, dep, dep_pct, closed, _, _, ici_pct = INST[acronym]
        assert (int(row["wos_total"]), int(row["deposited"]), int(row["closed"])) == (total, dep, closed)
        assert (row["deposit_inst_pct"], row["ici_pct"]) == (dep_pct, ici_pct)
        assert row["gci_pct"] == GOV[acronym][6]
    assert len(read_report_csv(small_run / "compliance_by_year.csv")) == 6
    diag = json.loads((small_run / "diagnostics.json").read_text())
    assert diag["counts"]["ingest.out_of_window"] == 2
    assert (small_run / "review_queue.csv").read_text().startswith("published_uid,deposit_id,")


def test_staged_commands_equal_end_to_end(small_golden, small_run, tmp_path):
    for command in ("ingest", "harvest", "match", "report"):
        assert main([command, *cli_args(small_golden, tmp_path)]) == 0
    assert read_tree(tmp_path) == read_tree(small_run)


def test_input_order_and_jobs_do_not_change_bytes(small_golden, small_run, tmp_path):
    args = cli_args(small_golden, tmp_path, "--jobs", "3")
    i = args.index("--published")
    args[i + 1:i + 3] = reversed(args[i + 1:i + 3])
    assert main(["run", *args]) == 0
    assert read_tree(tmp_path) == read_tree(small_run)


def test_structured_report_agrees_with_delimited(small_golden, small_run, tmp_path):
    assert main(["run", *cli_args(small_golden, tmp_path, "--format", "structured")]) == 0
    report = read_report_json(tmp_path / "compliance.json")
    rows = read_report_csv(small_run / "compliance.csv")
    for inst, row in zip(report.institutions, rows):
        assert inst.acronym == row["acronym"]
        assert inst.window.wos_total == int(row["wos_total"])
    assert report.audit_date == "2016-09-01"
    assert report.snapshot_date is not None


def test_dry_run_prints_counts(small_golden, tmp_path, capsys):
    assert main(["ingest", "--dry-run", *cli_args(small_golden, tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("parsed\t")
    assert lines[1:] == [f"UPO\t{INST['UPO'][0]}\t{GOV['UPO'][0]}", f"UVIC\t{INST['UVIC'][0]}\t{GOV['UVIC'][0]}"]
    assert not (tmp_path / "stages").exists()


def test_empty_institution_list_exits_2(small_golden, tmp_path):
    args = cli_args(small_golden, tmp_path)
    args[1] = ""
    assert main(["run", *args]) == 2


def test_unknown_institution_exits_2(small_golden, tmp_path):
    assert main(["run", *cli_args(small_golden, tmp_path, acronyms=["NOPE"])]) == 2


def test_missing_intermediate_exits_2(small_golden, tmp_path):
    assert main(["report", *cli_args(small_golden, tmp_path)]) == 2
    assert main(["match", *cli_args(small_golden, tmp_path)]) == 2


def test_window_mismatch_between_stages_exits_2(small_golden, tmp_path):
    assert main(["ingest", *cli_args(small_golden, tmp_path)]) == 0
    assert main(["harvest", *cli_args(small_golden, tmp_path, "--to-year", "2013")]) == 0
    assert main(["match", *cli_args(small_golden, tmp_path)]) == 2


def test_missing_fixture_page_exits_3(small_golden, tmp_path):
    fixtures = tmp_path / "pages"
    shutil.copytree(small_golden.fixtures, fixtures)
    (next(fixtures.glob("*/0.xml"))).unlink()
    args = cli_args(small_golden, tmp_path / "out")
    args[args.index("--fixtures") + 1] = str(fixtures)
    assert main(["run", *args]) == 3


def test_referential_error_exits_4(small_golden, small_run, tmp_path):
    shutil.copytree(small_run / "stages", tmp_path / "stages")
    path = tmp_path / "stages" / "match.json"
    data = json.loads(path.read_text())
    data["institutions"]["UPO"]["outcomes"][0].update(deposit_id="bogus", basis="doi")
    path.write_text(json.dumps(data))
    assert main(["report", *cli_args(small_golden, tmp_path)]) == 4


def test_unwritable_output_exits_5(small_golden, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert main(["run", *cli_args(small_golden, blocker / "out")]) == 5


def _repage(src, dst, target, size):
    records = []
    for page in sorted(src.glob(f"{target}/*.xml"), key=lambda p: int(p.stem)):
        records += parse_page(page.read_bytes(), target).records
    (dst / target).mkdir(parents=True)
    for offset in range(0, len(records), size):
        (dst / target / f"{offset}.xml").write_bytes(serialize_dc(records[offset:offset + size], target, len(records), offset))


def test_corrupt_later_page_is_noted_and_run_succeeds(small_golden, tmp_path):
    pages = tmp_path / "pages"
    for target_dir in small_golden.fixtures.iterdir():
        _repage(small_golden.fixtures, pages, target_dir.name, 100)
    victim = next(pages.glob("*/100.xml"))
    victim.write_bytes(victim.read_bytes()[:300])
    config = tmp_path / "audit.yaml"
    config.write_text(yaml.safe_dump({"page_size": 100, "fixtures": str(pages), "format": "structured"}))
    args = cli_args(small_golden, tmp_path / "out", "--config", str(config), "--format", "delimited")
    del args[args.index("--fixtures"):args.index("--fixtures") + 2]
    assert main(["run", *args]) == 0
    diag = json.loads((tmp_path / "out" / "diagnostics.json").read_text())
    assert diag["counts"]["harvest.malformed_page"] == 1
    # the flag given on the command line beat the config file
    assert (tmp_path / "out" / "compliance.csv").exists()
    assert not (tmp_path / "out" / "compliance.json").exists()


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("colour: green\n")
    with pytest.raises(ConfigError):
        AuditConfig.from_file(bad)
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == 2


def test_validate_rejects_bad_settings(tmp_path):
    for kwargs in ({"year_from": 2015, "year_to": 2012}, {"threshold": 1.5}, {"jobs": 0}, {"format": "xml"}):
        with pytest.raises(ConfigError):
            AuditConfig(**kwargs).validate("report")
    with pytest.raises(ConfigError):
        run_audit(AuditConfig(out=tmp_path))
