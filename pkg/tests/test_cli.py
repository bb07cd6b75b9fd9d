import csv
import io
import json

import pytest

from redistrib.cli import EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from redistrib.domain import FIXTURES
from redistrib.ingest import parse_trace, serialize


@pytest.fixture
def e1_files(tmp_path):
    camps, dons = serialize(FIXTURES["E1"]())
    (tmp_path / "campaigns.csv").write_text(camps)
    (tmp_path / "donations.csv").write_text(dons)
    return str(tmp_path / "campaigns.csv"), str(tmp_path / "donations.csv")


def test_validate(e1_files, tmp_path, capsys):
    assert main(["validate", *e1_files]) == EXIT_OK
    bad = tmp_path / "bad.csv"
    bad.write_text("campaign_id,goal_cents,start_day,end_day\nA,5000,1,10\nB,5000,1,1o\n")
    assert main(["validate", str(bad), e1_files[1]]) == EXIT_DATA
    assert "row 3" in capsys.readouterr().out
    assert main(["validate", str(tmp_path / "missing.csv"), e1_files[1]]) == EXIT_IO


def test_usage_errors(e1_files):
    with pytest.raises(SystemExit) as info:
        main(["solve", "--scheme", "bogus"])
    assert info.value.code == EXIT_USAGE
    assert main(["solve", "--fixture", "E1", "--synth"]) == EXIT_USAGE


def test_solve_writes_outputs(e1_files, tmp_path):
    camps, dons = e1_files
    for scheme, funded in [("naive", ["A", "B"]), ("repurposing", ["A"])]:
        out = tmp_path / scheme
        assert main(["solve", "--campaigns", camps, "--donations", dons, "--scheme", scheme, "--out-dir", str(out)]) == 0
        doc = json.loads((out / "solution.json").read_text())
        assert doc["funded"] == funded
        for name in ("report.json", "report_campaigns.csv", "report_groups.csv"):
            assert (out / name).exists()


def test_solve_is_byte_identical(e1_files, tmp_path):
    camps, dons = e1_files
    outs = []
    for run in ("a", "b"):
        main(["solve", "--campaigns", camps, "--donations", dons, "--out-dir", str(tmp_path / run)])
        outs.append({p.name: p.read_bytes() for p in (tmp_path / run).iterdir()})
    assert outs[0] == outs[1]


def test_config_file_and_override(e1_files, tmp_path):
    camps, dons = e1_files
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scheme": "repurposing", "campaigns": camps, "donations": dons}))
    main(["--config", str(cfg), "solve", "--out-dir", str(tmp_path / "c")])
    assert json.loads((tmp_path / "c" / "solution.json").read_text())["funded"] == ["A"]
    main(["--config", str(cfg), "solve", "--scheme", "naive", "--out-dir", str(tmp_path / "d")])
    assert json.loads((tmp_path / "d" / "solution.json").read_text())["funded"] == ["A", "B"]
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["--config", str(cfg), "solve", "--fixture", "E1"]) == EXIT_USAGE


def _curve(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_sweep(e1_files, tmp_path):
    camps, dons = e1_files
    args = ["sweep", "--campaigns", camps, "--donations", dons, "--samples", "5", "--seed", "4"]
    main(args + ["--kind", "donor", "--percentages", "0,100", "--out-dir", str(tmp_path / "a")])
    rows = _curve(tmp_path / "a" / "sweep_donor.csv")
    assert len(rows) == 2 and all(float(r["stddev"]) == 0 for r in rows)
    main(args + ["--kind", "donor", "--percentages", "0,100", "--out-dir", str(tmp_path / "b")])
    assert (tmp_path / "a" / "sweep_donor.csv").read_bytes() == (tmp_path / "b" / "sweep_donor.csv").read_bytes()
    main(args + ["--kind", "organizer", "--out-dir", str(tmp_path / "c")])
    assert all(1 <= float(r["mean"]) <= 2 for r in _curve(tmp_path / "c" / "sweep_organizer.csv"))


def test_synth(tmp_path):
    assert main(["synth", "--out-dir", str(tmp_path / "full")]) == 0
    inst, _ = parse_trace((tmp_path / "full" / "campaigns.csv").read_bytes(), (tmp_path / "full" / "donations.csv").read_bytes())
    assert len(inst.campaigns) == 228
    small = ["synth", "--n-campaigns", "1", "--n-donors", "3", "--repeat-fraction", "0"]
    main(small + ["--out-dir", str(tmp_path / "one")])
    main(small + ["--out-dir", str(tmp_path / "two")])
    text = (tmp_path / "one" / "campaigns.csv").read_text()
    assert len(text.splitlines()) == 2
    assert text == (tmp_path / "two" / "campaigns.csv").read_text()


def test_oracle_command(capsys):
    assert main(["oracle", "--fixture", "E1", "--scheme", "unordered", "--success", "A,B"]) == 0
    assert "infeasible" in capsys.readouterr().out
    assert main(["oracle", "--fixture", "E1"]) == 0
    assert "2" in capsys.readouterr().out


def test_help_shows_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--help"])
    assert "default: naive" in capsys.readouterr().out
