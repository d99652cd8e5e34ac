"""INI configuration loading and the command-line interface."""

import numpy as np
import pytest

from aurora_qd import RunConfig, SuiteConfig, load_run_config, load_suite_config
from aurora_qd.cli import main
from aurora_qd.config import config_from_dict, config_to_dict
from aurora_qd.serialization import read_metrics_csv


def write_config(tmp_path, text, name="config.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


TINY_RUN = """
[run]
task = ballistic
variant = hand_coded
batches = 3
batch_size = 8
seed = 5
update_batches = 0
"""


def test_defaults_match_dataclass(tmp_path):
    path = write_config(tmp_path, "[run]\n")
    config = load_run_config(path)
    assert config == RunConfig()


def test_run_section_parsing(tmp_path):
    path = write_config(tmp_path, """
[run]
task = airhockey
variant = ae_inc
batches = 100
batch_size = 32
seed = 9
n_init = 64
target_capacity = 2000
l_min = 1e-5
sigma_fraction = 0.1
update_batches = 0, 10, 20
use_grid_index = true
""")
    config = load_run_config(path)
    assert config.task == "airhockey" and config.variant == "ae_inc"
    assert config.batches == 100 and config.batch_size == 32
    assert config.seed == 9 and config.n_init == 64
    assert config.target_capacity == 2000
    assert config.l_min == 1e-5 and config.sigma_fraction == 0.1
    assert config.update_batches == (0, 10, 20)
    assert config.use_grid_index is True
    assert config.resolved_n_init == 64


def test_nested_sections(tmp_path):
    path = write_config(tmp_path, """
[run]
task = ballistic

[ballistic]
gravity = 9.0
force_max = 8.0

[dr]
max_epochs = 100
n_repeats = 2

[cvt]
blind_k = 5000

[metrics]
klc_bins = 20

[curiosity]
reward = 2.0

[airhockey]
friction = 0.5
puck_start_x = 0.4
""")
    config = load_run_config(path)
    assert config.ballistic.gravity == 9.0
    assert config.ballistic.force_max == 8.0
    assert config.dr.max_epochs == 100 and config.dr.n_repeats == 2
    assert config.cvt.blind_k == 5000
    assert config.metrics.klc_bins == 20
    assert config.curiosity.reward == 2.0
    assert config.airhockey.friction == 0.5
    assert config.airhockey.puck_start == (0.4, 0.35)


def test_inline_comments_ignored(tmp_path):
    path = write_config(tmp_path, """
[run]
batches = 10  # keep it short
seed = 4 ; another comment style
""")
    config = load_run_config(path)
    assert config.batches == 10 and config.seed == 4


def test_unknown_key_raises(tmp_path):
    path = write_config(tmp_path, "[run]\nbatchez = 5\n")
    with pytest.raises(ValueError, match="batchez"):
        load_run_config(path)


def test_unknown_section_raises(tmp_path):
    path = write_config(tmp_path, "[run]\n\n[misc]\nx = 1\n")
    with pytest.raises(ValueError, match="misc"):
        load_run_config(path)


def test_unknown_nested_key_raises(tmp_path):
    path = write_config(tmp_path, "[run]\n\n[dr]\nlearning = fast\n")
    with pytest.raises(ValueError, match="learning"):
        load_run_config(path)


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_run_config(tmp_path / "nope.ini")


def test_validation_failures(tmp_path):
    with pytest.raises(ValueError, match="variant"):
        load_run_config(write_config(tmp_path, "[run]\nvariant = magic\n"))
    # Prior-based variants need the genotype grid, which only the
    # ballistic task defines.
    with pytest.raises(ValueError, match="prior"):
        load_run_config(write_config(
            tmp_path, "[run]\ntask = airhockey\nvariant = pca_pre\n", "b.ini"))
    with pytest.raises(ValueError, match="batches"):
        RunConfig(batches=0).validate()


def test_suite_config(tmp_path):
    path = write_config(tmp_path, TINY_RUN + """
[suite]
variants = hand_coded, genotype
replications = 2
base_seed = 7
parallel = 2
""")
    suite = load_suite_config(path)
    assert suite.variants == ("hand_coded", "genotype")
    assert suite.replications == 2 and suite.base_seed == 7
    assert suite.parallel == 2
    assert suite.run.batches == 3


def test_suite_unknown_key(tmp_path):
    path = write_config(tmp_path, TINY_RUN + "[suite]\nreps = 2\n")
    with pytest.raises(ValueError, match="reps"):
        load_suite_config(path)


def test_suite_validates_each_variant(tmp_path):
    with pytest.raises(ValueError):
        SuiteConfig(variants=("hand_coded", "bogus")).validate()
    with pytest.raises(ValueError):
        SuiteConfig(replications=0).validate()


def test_config_dict_round_trip():
    config = RunConfig(task="airhockey", variant="ae_inc", batches=7,
                       update_batches=(0, 3))
    data = config_to_dict(config)
    assert data["variant"] == "ae_inc"
    rebuilt = config_from_dict(data)
    assert rebuilt == config
    # JSON turns tuples into lists; the rebuild must undo that.
    import json
    rebuilt2 = config_from_dict(json.loads(json.dumps(data)))
    assert rebuilt2 == config


# ---------------------------------------------------------------------- CLI

def test_cli_run(tmp_path, capsys):
    config = write_config(tmp_path, TINY_RUN)
    out = tmp_path / "out"
    code = main(["run", "--config", str(config), "--out", str(out), "--quiet"])
    assert code == 0
    assert (out / "metrics.csv").is_file()
    assert (out / "summary.json").is_file()
    assert (out / "archive_final.json").is_file()
    assert (out / "config.json").is_file()
    captured = capsys.readouterr()
    assert "hand_coded seed=5" in captured.out
    _, rows = read_metrics_csv(out / "metrics.csv")
    assert len(rows) == 3


def test_cli_run_seed_override(tmp_path, capsys):
    config = write_config(tmp_path, TINY_RUN)
    code = main(["run", "--config", str(config), "--seed", "77", "--quiet",
                 "--out", str(tmp_path / "o")])
    assert code == 0
    assert "seed=77" in capsys.readouterr().out


def test_cli_out_env_fallback(tmp_path, capsys, monkeypatch):
    config = write_config(tmp_path, TINY_RUN)
    env_out = tmp_path / "env_out"
    monkeypatch.setenv("AURORA_QD_OUT", str(env_out))
    assert main(["run", "--config", str(config), "--quiet"]) == 0
    assert (env_out / "metrics.csv").is_file()


def test_cli_suite_and_export(tmp_path, capsys, monkeypatch):
    config = write_config(tmp_path, TINY_RUN + """
[suite]
variants = hand_coded, genotype
replications = 2
base_seed = 1
""")
    out = tmp_path / "suite_out"
    monkeypatch.setenv("AURORA_QD_PARALLEL", "1")
    code = main(["suite", "--config", str(config), "--out", str(out), "--quiet"])
    assert code == 0
    assert (out / "suite_summary.json").is_file()
    assert (out / "suite_summary.csv").is_file()
    assert (out / "reference" / "metrics.csv").is_file()
    assert (out / "reference_descriptors.csv").is_file()
    runs = sorted(p.name for p in (out / "runs").iterdir())
    assert runs == ["genotype_seed1", "genotype_seed2",
                    "hand_coded_seed1", "hand_coded_seed2"]
    assert (out / "plots" / "plot_klc_hand_coded.csv").is_file()
    capsys.readouterr()

    # Re-export from the stored tree alone.
    export_dir = tmp_path / "plots2"
    code = main(["export", "--runs", str(out), "--metric", "size",
                 "--out", str(export_dir)])
    assert code == 0
    assert (export_dir / "plot_size_genotype.csv").is_file()
    listed = capsys.readouterr().out.strip().splitlines()
    assert len(listed) > 0


def test_cli_suite_replications_override(tmp_path, capsys):
    config = write_config(tmp_path, TINY_RUN + """
[suite]
variants = hand_coded
replications = 3
""")
    out = tmp_path / "s"
    code = main(["suite", "--config", str(config), "--replications", "1",
                 "--out", str(out), "--quiet"])
    assert code == 0
    assert len(list((out / "runs").iterdir())) == 1


def test_cli_errors_exit_nonzero(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.ini")]) == 1
    assert "error:" in capsys.readouterr().err
    bad = write_config(tmp_path, "[run]\nvariant = nope\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert main(["export", "--runs", str(tmp_path / "nothing"),
                 "--metric", "klc"]) == 1
