import json

from iled import datasets
from iled.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_xhail_reproduces_the_batch_example(capsys, tmp_path):
    data = datasets.path("table3")
    code, out, _ = run(capsys, "xhail", "--data", data, "--out", tmp_path,
                       "--dump-kernel", tmp_path / "k", "--dump-transformed", tmp_path / "t",
                       "--dump-ground", tmp_path / "g")
    assert code == 0
    expected = (data / "expected.lp").read_text()
    assert (tmp_path / "hypothesis.lp").read_text() == out
    from iled.syntax import parse_program
    from conftest import keys
    assert keys(parse_program(out)) == keys(parse_program(expected))
    assert list((tmp_path / "k").iterdir()) and list((tmp_path / "t").iterdir()) and list((tmp_path / "g").iterdir())


def test_generate_learn_evaluate_inspect(capsys, tmp_path):
    gen = tmp_path / "gen"
    assert run(capsys, "generate", "--out", gen, "--seed", 1, "--examples", 60, "--test-examples", 40,
               "--window", 10, "--persons", 3)[0] == 0
    assert {p.name for p in gen.iterdir()} >= {"train.lp", "test.lp", "truth.lp", "modes.lp", "background.lp"}
    out = tmp_path / "run"
    code, text, _ = run(capsys, "learn", "--data", gen / "train.lp", "--modes", gen / "modes.lp",
                        "--background", gen / "background.lp", "--out", out, "--metrics", out / "metrics.jsonl",
                        "--test", gen / "test.lp", "--audit", "--jobs", 2)
    assert code == 0 and text.startswith(("initiatedAt", "terminatedAt"))
    summary = json.loads((out / "metrics.jsonl").read_text().splitlines()[-1])
    assert summary["summary"] and summary["steps"] == 6
    code, text, _ = run(capsys, "evaluate", "--hypothesis", out / "hypothesis.lp", "--data", gen / "test.lp",
                        "--background", gen / "background.lp")
    assert code == 0 and json.loads(text)["precision"] == summary["precision"]
    code, text, _ = run(capsys, "inspect", out, "--data", gen / "train.lp", "--background", gen / "background.lp")
    assert code == 0 and "support:" in text and "window 1: covered" in text
    code, text, _ = run(capsys, "inspect", gen / "test.lp")
    assert code == 0 and text.startswith("window 7:")


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "learn")[0] == 1
    empty = tmp_path / "empty"
    empty.mkdir()
    (empty / "modes.lp").write_text((datasets.path("table3") / "modes.lp").read_text())
    assert run(capsys, "learn", "--data", empty)[0] == 2
    assert run(capsys, "learn", "--data", datasets.path("table2"))[0] == 1  # no modes
    assert run(capsys, "learn", "--data", datasets.path("table3"), "--window", 1)[0] == 1
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "modes.lp").write_text((datasets.path("table3") / "modes.lp").read_text())
    (bad / "stream.lp").write_text("window 1 0 2.\n%% annotation\nnot holdsAt(fighting(id1,id2),0).\n"
                                   "holdsAt(fighting(id1,id2),1).\nholdsAt(fighting(id1,id2),2).\n")
    assert run(capsys, "learn", "--data", bad)[0] == 3
    assert run(capsys, "xhail", "--data", datasets.path("table3"), "--node-cap", 1)[0] == 4
    (bad / "stream.lp").write_text("window 1 0 2.\nhappensAt(walking(id1),1\n")
    code, _, err = run(capsys, "learn", "--data", bad)
    assert code == 2 and "ParseError" in err


def test_window_flag_resplits(capsys, tmp_path):
    gen = tmp_path / "gen"
    run(capsys, "generate", "--out", gen, "--examples", 40, "--test-examples", 0, "--window", 10)
    m = tmp_path / "m.jsonl"
    assert run(capsys, "learn", "--data", gen / "train.lp", "--modes", gen / "modes.lp",
               "--background", gen / "background.lp", "--window", 20, "--metrics", m)[0] == 0
    assert json.loads(m.read_text().splitlines()[-1])["steps"] == 2


def test_learn_mode_first_step_equals_batch_mode(capsys, tmp_path):
    data = datasets.path("table3")
    _, batch, _ = run(capsys, "xhail", "--data", data)
    _, inc, _ = run(capsys, "learn", "--data", data)
    assert batch == inc
