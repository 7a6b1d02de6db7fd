import csv
import io
import json
import logging

from utils import Pipeline, tiny_config_document, write_config

from src.cli import RunConfig
from src.console import Colors
from src.envs import MazeSpec
from src.policy import Conditioning
from src.utils import ColorFormatter


def config_file(tmp_path, name="config.json", **sections):
    return write_config(tmp_path / name, tiny_config_document(**sections))


def gen_maze(tmp_path, config, out="data", seed=7, n=6):
    code, stdout, stderr = Pipeline(
        "gen-data", "--env", "minimaze", "--layout", "corridor-S", "--n", n, "--seed", seed,
        "--out", tmp_path / out, "--config", config,
    ).run()
    assert code == 0, stderr
    return tmp_path / out, stdout


def train_trajnet(tmp_path, config, data, out="trajnet", seed=0):
    code, stdout, stderr = Pipeline(
        "train-trajnet", "--config", config, "--data", data, "--seed", seed, "--out", tmp_path / out,
    ).run()
    assert code == 0, stderr
    return tmp_path / out, stdout


def test_001(tmp_path):
    """gen-data writes a dataset and prints its audit as JSON"""
    data, stdout = gen_maze(tmp_path, config_file(tmp_path))
    summary = json.loads(stdout)
    assert summary["n"] == 6
    assert summary["length"]["max"] == 40
    assert 0.0 <= summary["success_fraction"] <= 1.0
    assert (data / "meta.json").exists() and (data / "trajectories.jsonl").exists()


def test_002(tmp_path):
    """An unknown layout exits 2 and names the shipped layouts"""
    code, _, stderr = Pipeline("gen-data", "--layout", "spiral", "--out", tmp_path / "d").run()
    assert code == 2
    assert "error:" in stderr and "corridor-S" in stderr


def test_003(tmp_path):
    """The same seed gives byte-identical datasets"""
    config = config_file(tmp_path)
    first, _ = gen_maze(tmp_path, config, out="a")
    second, _ = gen_maze(tmp_path, config, out="b")
    for name in ("meta.json", "trajectories.jsonl"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_004(tmp_path):
    """train-trajnet writes the resolved config, metrics and every epoch checkpoint"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    run, stdout = train_trajnet(tmp_path, config, data)
    best_epoch = int(stdout.strip())
    assert 1 <= best_epoch <= 5
    resolved = json.loads((run / "resolved-config.json").read_text())
    assert resolved["trajnet"]["k"] == 3 and resolved["trajnet"]["p"] == 4
    assert resolved["trajnet"]["reconstruction_subspace"] == [0, 1]
    assert resolved["run"]["command"] == "train-trajnet" and resolved["run"]["seed"] == 0
    names = sorted(p.name for p in (run / "checkpoints").glob("*.ckpt"))
    assert names == [f"trajnet-epoch-{e:03d}.ckpt" for e in range(1, 6)]
    assert json.loads((run / "checkpoints" / "best.json").read_text())["epoch"] == best_epoch
    phases = [json.loads(line)["phase"] for line in (run / "metrics.jsonl").read_text().splitlines()]
    assert {"trajnet-train", "trajnet-val"} <= set(phases)


def test_005(tmp_path):
    """Unknown config keys and objectives are usage errors"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    typo = config_file(tmp_path, "typo.json", trajnet={"d_modle": 8})
    code, _, stderr = Pipeline("train-trajnet", "--config", typo, "--data", data, "--out", tmp_path / "r").run()
    assert code == 2 and "d_modle" in stderr

    section = write_config(tmp_path / "section.json", {"optimizer": {}})
    assert Pipeline("train-trajnet", "--config", section, "--data", data, "--out", tmp_path / "r").run()[0] == 2

    bad = config_file(tmp_path, "bad.json", trajnet={"objective": "mae-xyz"})
    code, _, stderr = Pipeline("train-trajnet", "--config", bad, "--data", data, "--out", tmp_path / "r").run()
    assert code == 2 and "mae-rc" in stderr


def test_006(tmp_path):
    """A missing dataset is reported as incompatible"""
    code, _, stderr = Pipeline("train-trajnet", "--data", tmp_path / "nowhere", "--out", tmp_path / "r").run()
    assert code == 3 and "error:" in stderr


def test_007(tmp_path):
    """train-policy with no conditioning needs no TrajNet; bottleneck does"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    code, stdout, stderr = Pipeline(
        "train-policy", "--config", config, "--data", data, "--conditioning", "none", "--out", tmp_path / "bc",
    ).run()
    assert code == 0, stderr
    assert float(stdout.strip()) >= 0.0
    assert len(list((tmp_path / "bc" / "checkpoints").glob("policy-epoch-*.ckpt"))) == 5

    code, _, _ = Pipeline("train-policy", "--config", config, "--data", data, "--out", tmp_path / "gc").run()
    assert code == 2


def test_008(tmp_path):
    """A TrajNet trained on another environment is incompatible with the data"""
    config = config_file(tmp_path)
    maze, _ = gen_maze(tmp_path, config)
    code, _, stderr = Pipeline(
        "gen-data", "--env", "linerun", "--n", 3, "--out", tmp_path / "line", "--config", config,
    ).run()
    assert code == 0, stderr
    run, _ = train_trajnet(tmp_path, config, tmp_path / "line")
    checkpoint = run / "checkpoints" / "trajnet-epoch-005.ckpt"
    code, _, stderr = Pipeline(
        "train-policy", "--config", config, "--data", maze, "--trajnet", checkpoint, "--out", tmp_path / "p",
    ).run()
    assert code == 3 and "error:" in stderr


def test_009(tmp_path):
    """Stage 1, stage 2 and evaluation chain into a report"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    run, _ = train_trajnet(tmp_path, config, data)
    checkpoint = run / "checkpoints" / "trajnet-epoch-005.ckpt"
    code, _, stderr = Pipeline(
        "train-policy", "--config", config, "--data", data, "--trajnet", checkpoint, "--out", tmp_path / "policy",
    ).run()
    assert code == 0, stderr
    resolved = json.loads((tmp_path / "policy" / "resolved-config.json").read_text())
    assert resolved["policy"]["conditioning"] == "bottleneck"
    assert resolved["run"]["trajnet"].endswith("trajnet-epoch-005.ckpt")

    code, stdout, stderr = Pipeline("eval", "--run", tmp_path / "policy", "--seeds", 0, 1).run()
    assert code == 0, stderr
    report = json.loads((tmp_path / "policy" / "report.json").read_text())
    for key in ("mean", "std", "median", "iqm", "n_seeds", "n_episodes", "records"):
        assert key in report
    assert report["n_seeds"] == 2 and report["n_episodes"] == 2
    assert [r["epochs"] for r in report["records"]] == [[1, 2, 3, 4, 5]] * 2
    assert "iqm" in stdout


def test_010(tmp_path):
    """eval refuses a directory that is not a run"""
    code, _, stderr = Pipeline("eval", "--run", tmp_path).run()
    assert code == 2 and "resolved-config.json" in stderr


def test_011(tmp_path):
    """viz-future exports p decoded states and a maze overlay"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    run, _ = train_trajnet(tmp_path, config, data)
    checkpoint = run / "checkpoints" / "trajnet-epoch-005.ckpt"
    code, _, stderr = Pipeline(
        "viz-future", "--trajnet", checkpoint, "--data", data, "--index", 0, "--t", 5, "--out", tmp_path / "viz",
    ).run()
    assert code == 0, stderr

    with (tmp_path / "viz.csv").open(newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "dim0", "dim1"]
    assert [int(r[0]) for r in rows[1:]] == [6, 7, 8, 9]
    assert all(len(r) == 3 for r in rows[1:])

    svg = (tmp_path / "viz.svg").read_text()
    walls = MazeSpec.named("corridor-S").wall_cells()
    assert svg.count('id="wall-') == len(walls)
    for gid in ("history", "future", "goal"):
        assert f'id="{gid}"' in svg


def test_012(tmp_path):
    """viz-future rejects an anchor outside the trajectory"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    run, _ = train_trajnet(tmp_path, config, data)
    checkpoint = run / "checkpoints" / "trajnet-epoch-005.ckpt"
    code, _, stderr = Pipeline(
        "viz-future", "--trajnet", checkpoint, "--data", data, "--index", 0, "--t", 1000, "--out", tmp_path / "viz",
    ).run()
    assert code == 2 and "error:" in stderr
    assert not (tmp_path / "viz.csv").exists()


def test_013(tmp_path):
    """sweep trains one run per value and summarizes them"""
    config = config_file(tmp_path, trajnet={"epochs": 2})
    data, _ = gen_maze(tmp_path, config)
    code, stdout, stderr = Pipeline(
        "sweep", "--key", "trajnet.p", "--values", 2, 3, "--config", config, "--data", data,
        "--out", tmp_path / "sweep",
    ).run()
    assert code == 0, stderr
    summary = json.loads((tmp_path / "sweep" / "sweep.json").read_text())
    assert summary["key"] == "trajnet.p"
    assert [r["value"] for r in summary["results"]] == [2, 3]
    for value in (2, 3):
        resolved = json.loads((tmp_path / "sweep" / f"p-{value}" / "resolved-config.json").read_text())
        assert resolved["trajnet"]["p"] == value
    assert len(stdout.strip().splitlines()) == 2


def test_014(tmp_path):
    """sweep only varies trajnet hyperparameters"""
    code, _, _ = Pipeline(
        "sweep", "--key", "policy.epochs", "--values", 1, "--data", tmp_path, "--out", tmp_path / "s",
    ).run()
    assert code == 2


def test_015(tmp_path):
    """The whole pipeline is reproducible from its seeds"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    first, _ = train_trajnet(tmp_path, config, data, out="a")
    second, _ = train_trajnet(tmp_path, config, data, out="b")
    assert (first / "metrics.jsonl").read_bytes() == (second / "metrics.jsonl").read_bytes()
    for path in sorted((first / "checkpoints").glob("*.ckpt")):
        assert path.read_bytes() == (second / "checkpoints" / path.name).read_bytes()


def test_016(tmp_path):
    """Argument errors exit 2"""
    assert Pipeline("train-trajnet", "--out", tmp_path).run()[0] == 2
    assert Pipeline("launch").run()[0] == 2


def test_017():
    """The default run config builds and round-trips its policy section"""
    config = RunConfig()
    assert config.policy.conditioning is Conditioning.BOTTLENECK
    assert RunConfig.from_dict(config.to_dict()).policy.conditioning is Conditioning.BOTTLENECK


def test_018(tmp_path):
    """A TrajNet whose state layout the data cannot fill is incompatible, not a usage error"""
    config = config_file(tmp_path, trajnet={"include_actions": True})
    maze, _ = gen_maze(tmp_path, config)
    run, _ = train_trajnet(tmp_path, config, maze)
    code, _, stderr = Pipeline(
        "gen-data", "--env", "linerun", "--n", 3, "--out", tmp_path / "line", "--config", config,
    ).run()
    assert code == 0, stderr
    code, _, stderr = Pipeline(
        "train-policy", "--config", config, "--data", tmp_path / "line",
        "--trajnet", run / "checkpoints" / "trajnet-epoch-005.ckpt", "--out", tmp_path / "p",
    ).run()
    assert code == 3 and "state_dim" in stderr


def test_019(tmp_path):
    """viz-future decodes one history toward different goals"""
    config = config_file(tmp_path)
    data, _ = gen_maze(tmp_path, config)
    run, _ = train_trajnet(tmp_path, config, data)
    checkpoint = run / "checkpoints" / "trajnet-epoch-005.ckpt"
    futures = {}
    for name, goal in (("near", (1.5, 1.5)), ("far", (7.5, 5.5))):
        code, _, stderr = Pipeline(
            "viz-future", "--trajnet", checkpoint, "--data", data, "--index", 0, "--t", 5,
            "--goal", *goal, "--out", tmp_path / name,
        ).run()
        assert code == 0, stderr
        futures[name] = (tmp_path / f"{name}.csv").read_text()
    assert futures["near"] != futures["far"]

    code, _, _ = Pipeline(
        "viz-future", "--trajnet", checkpoint, "--data", data, "--index", 0, "--t", 5,
        "--goal", 1.0, 2.0, 3.0, "--out", tmp_path / "bad",
    ).run()
    assert code == 2


def test_020():
    """Log levels are only coloured on a terminal"""
    plain = Colors(io.StringIO())
    assert not plain.supported and plain.red("x") == "x"
    record = logging.LogRecord("gcpc.cli", logging.WARNING, __file__, 1, "wrote %s", ("a.csv",), None)
    assert ColorFormatter(plain).format(record) == "WARNING gcpc.cli: wrote a.csv"
    assert record.levelname == "WARNING"
