import csv
import json

import pytest

from cli import main
from commands import EXIT_EXHAUSTED, EXIT_OK, EXIT_USAGE, ChannelSpecError, load_channel
from config import settings
from sampling import bssc, random_channel

FAST = ["--grid", "11", "--refine", "1"]


def _report(path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def _write_channel(path, body) -> str:
    path.write_text(json.dumps(body) if not isinstance(body, str) else body, encoding="utf-8")
    return str(path)


class TestChannelLoading:
    def test_decimal_strings(self, tmp_path):
        source = _write_channel(
            tmp_path / "ch.json",
            {"input_size": 2, "to_y": [["1", "0"], ["0.5", "0.5"]],
             "to_z": [["0.5", "0.5"], ["0", "1"]]},
        )
        assert load_channel(source) == bssc(0.5)

    def test_named_entry(self, tmp_path):
        source = _write_channel(tmp_path / "ch.json", {"named": "random:4:3:2"})
        assert load_channel(source) == random_channel(3, 2, 4)

    def test_row_sum_is_checked(self, tmp_path):
        source = _write_channel(
            tmp_path / "ch.json", {"to_y": [[0.6, 0.6], [0.5, 0.5]], "to_z": [[1, 0], [0, 1]]}
        )
        with pytest.raises(ChannelSpecError, match=r"to_y\[0\]"):
            load_channel(source)

    def test_both_forms_at_once(self, tmp_path):
        source = _write_channel(
            tmp_path / "ch.json", {"named": "ss1", "to_y": [[1, 0]], "to_z": [[1, 0]]}
        )
        with pytest.raises(ChannelSpecError):
            load_channel(source)

    def test_unknown_name(self):
        with pytest.raises(ChannelSpecError):
            load_channel("no-such-channel")


class TestVerify:
    def test_useless_channel_holds(self, tmp_path):
        out, table = tmp_path / "report.json", tmp_path / "margins.csv"
        code = main(["verify", "--channel", "ss1", "--out", str(out), "--csv", str(table), *FAST])
        assert code == EXIT_OK
        report = _report(out)
        assert report["command"] == "verify"
        assert report["payload"]["holds"] is True
        assert report["channel_digest"] == report["payload"]["channel_digest"]
        rows = list(csv.DictReader(table.open(encoding="utf-8")))
        assert len(rows) == 16
        assert {row["case"] for row in rows} == {"CONST", "PASS", "AND", "XOR"}

    def test_channel_file(self, tmp_path):
        source = _write_channel(
            tmp_path / "ch.json",
            {"to_y": [["0.9", "0.1"], ["0.2", "0.8"]], "to_z": [["0.7", "0.3"], ["0.4", "0.6"]]},
        )
        assert main(["verify", "--channel", source, "--out", str(tmp_path / "r.json"), *FAST]) == 0

    def test_malformed_json(self, tmp_path):
        source = _write_channel(tmp_path / "ch.json", "{not json")
        assert main(["verify", "--channel", source, *FAST]) == EXIT_USAGE

    def test_report_on_stdout(self, capsys):
        assert main(["verify", "--channel", "ss1", *FAST]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["payload"]["holds"] is True


@pytest.mark.parametrize(
    "argv",
    [["verify"], ["verify", "--channel", "ss1", "--bogus"], ["explode"], []],
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


class TestCounterexample:
    def test_blackwell(self, tmp_path):
        out = tmp_path / "ce.json"
        code = main(["counterexample", "--channel", "blackwell", "--grid", "13", "--refine", "1",
                     "--out", str(out)])
        assert code == EXIT_OK
        payload = _report(out)["payload"]
        assert payload["found"] is True
        assert payload["margin"] < -1e-3

    def test_padded_binary_channel_is_exhausted(self, tmp_path):
        source = _write_channel(
            tmp_path / "ch.json",
            {"to_y": [[1, 0], [0.5, 0.5], [1, 0]], "to_z": [[0.5, 0.5], [0, 1], [0.5, 0.5]]},
        )
        out = tmp_path / "ce.json"
        code = main(["counterexample", "--channel", source, "--out", str(out), *FAST])
        assert code == EXIT_EXHAUSTED
        assert _report(out)["payload"]["found"] is False

    def test_binary_channel_is_refused(self):
        assert main(["counterexample", "--channel", "bssc:0.5", *FAST]) == EXIT_USAGE


def test_hunt_is_reproducible(tmp_path):
    payloads = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = main(["hunt", "--trials", "1", "--seed", "7", "--grid", "9", "--refine", "1",
                     "--out", str(out)])
        assert code == EXIT_OK
        payloads.append(_report(out)["payload"])
    assert payloads[0] == payloads[1]
    assert payloads[0]["worst_seed"] == 7
    assert payloads[0]["violating_seeds"] == []


def test_hunt_needs_a_trial():
    assert main(["hunt", "--trials", "0", *FAST]) == EXIT_USAGE


def test_hunt_uses_its_own_grid_by_default(tmp_path):
    out = tmp_path / "hunt.json"
    assert main(["hunt", "--trials", "1", "--refine", "1", "--out", str(out)]) == EXIT_OK
    assert _report(out)["config"]["grid_resolution"] == settings.hunt_grid_resolution


def test_unwritable_report_path_is_a_usage_error(tmp_path):
    assert main(["verify", "--channel", "ss1", "--out", str(tmp_path), *FAST]) == EXIT_USAGE


def test_unwritable_margin_table_is_a_usage_error(tmp_path):
    out = tmp_path / "report.json"
    table = tmp_path / "missing" / "margins.csv"
    code = main(["verify", "--channel", "ss1", "--out", str(out), "--csv", str(table), *FAST])
    assert code == EXIT_USAGE


def test_sumrate_identity(tmp_path):
    out = tmp_path / "sr.json"
    assert main(["sumrate", "--channel", "identity", "--out", str(out), *FAST]) == EXIT_OK
    payload = _report(out)["payload"]
    assert payload["rtd_value"] == pytest.approx(1.0, abs=1e-9)
    assert payload["marton_value"] == pytest.approx(1.0, abs=1e-9)
    assert payload["marton_rtd_gap"] == pytest.approx(0.0, abs=1e-9)
    assert payload["rtd_equality"]["holds"] is True
    assert payload["outer_estimate"] == pytest.approx(1.0, abs=1e-9)


class TestStationarity:
    def test_and_sweep(self, tmp_path):
        out = tmp_path / "st.json"
        code = main(["stationarity", "--channel", "random:0", "--gate", "and", "--points", "2",
                     "--out", str(out)])
        assert code == EXIT_OK
        assert _report(out)["payload"]["inconclusive"] == 0

    def test_zero_channel_entries_are_refused(self):
        assert main(["stationarity", "--channel", "bssc", "--points", "2"]) == EXIT_USAGE
