import csv

import numpy as np
import pytest

from sscfkit.cli import main
from sscfkit.dsp import Waveform
from sscfkit.formats import read_csv, read_htk, read_raw, read_wav, write_wav


@pytest.fixture
def one_second_wav(tmp_path):
    r = np.random.default_rng(2)
    path = tmp_path / "a.wav"
    write_wav(path, Waveform(r.uniform(-0.5, 0.5, 16000), 16000))
    return path


def test_extract_csv(tmp_path, one_second_wav, capsys):
    out = tmp_path / "d"
    assert main(["extract", "--input", str(one_second_wav), "--profile", "mfcc6_dd",
                 "--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "a.csv")))
    assert len(rows[0]) == 19 and rows[0][0] == "frame"
    assert len(rows) == 99
    assert "98 frames" in capsys.readouterr().out


def test_extract_mfcc13_rows(tmp_path, one_second_wav):
    out = tmp_path / "d"
    assert main(["extract", "--input", str(one_second_wav), "--profile", "mfcc13_dd", "--out", str(out)]) == 0
    assert read_csv(out / "a.csv").shape == (98, 39)


@pytest.mark.parametrize("fmt", ["htk", "raw-binary"])
def test_extract_binary_formats(tmp_path, one_second_wav, fmt):
    out = tmp_path / "d"
    assert main(["extract", "--input", str(one_second_wav), "--profile", "mfcc6_dd_polar_ratio_sscf0_mvn",
                 "--format", fmt, "--out", str(out)]) == 0
    if fmt == "htk":
        data, period, kind = read_htk(out / "a.htk")
        assert period == 100000 and kind == 9
    else:
        data, meta = read_raw(out / "a.bin")
        assert meta["profile"] == "mfcc6_dd_polar_ratio_sscf0_mvn"
    assert data.shape == (98, 21)


def test_missing_profile_is_usage_error(tmp_path, one_second_wav, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["extract", "--input", str(one_second_wav), "--out", str(tmp_path)])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_conflicting_inputs(tmp_path, one_second_wav):
    with pytest.raises(SystemExit) as exc:
        main(["extract", "--input", str(one_second_wav), "--manifest", "m.tsv",
              "--profile", "mfcc6_dd", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_unknown_profile(tmp_path, one_second_wav):
    with pytest.raises(SystemExit) as exc:
        main(["extract", "--input", str(one_second_wav), "--profile", "plp", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_manifest_partial_failure(tmp_path, one_second_wav, capsys):
    m = tmp_path / "m.tsv"
    m.write_text(f"good\t{one_second_wav}\nbad\tmissing.wav\n")
    code = main(["extract", "--manifest", str(m), "--profile", "mfcc6_dd", "--out", str(tmp_path / "o")])
    assert code == 1
    assert (tmp_path / "o" / "good.csv").exists()
    assert "bad\tFAILED" in capsys.readouterr().err


def test_empty_manifest(tmp_path):
    m = tmp_path / "m.tsv"
    m.write_text("")
    assert main(["extract", "--manifest", str(m), "--profile", "mfcc6_dd", "--out", str(tmp_path / "o")]) == 0


def test_synth_then_extract(tmp_path):
    wav = tmp_path / "ai.wav"
    assert main(["synth", "--from", "a", "--to", "i", "--dur", "0.3", "--out", str(wav)]) == 0
    w = read_wav(wav)
    assert w.sample_rate_hz == 16000 and len(w) == 4800
    from scipy.io import wavfile
    assert wavfile.read(wav)[1].dtype == np.int16
    assert main(["extract", "--input", str(wav), "--profile", "mfcc6_dd", "--out", str(tmp_path)]) == 0
    assert read_csv(tmp_path / "ai.csv").shape == (28, 18)


def test_synth_defaults_name_and_female(tmp_path):
    assert main(["synth", "--from", "/u/", "--to", "/e/", "--speaker", "female", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "ue.wav").exists()


def test_synth_config_section(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("[synth]\nfrom = o\nto = a\ndur = 0.2\nrate = 8000\n")
    out = tmp_path / "x.wav"
    assert main(["synth", "--config", str(cfg), "--out", str(out)]) == 0
    w = read_wav(out)
    assert w.sample_rate_hz == 8000 and len(w) == 1600


@pytest.mark.parametrize("args", [["--from", "a", "--to", "i", "--dur", "10"],
                                  ["--from", "a", "--to", "y"],
                                  ["--to", "i"]])
def test_synth_usage_errors(tmp_path, args):
    with pytest.raises(SystemExit) as exc:
        main(["synth", *args, "--out", str(tmp_path / "x.wav")])
    assert exc.value.code == 2


def _synth(tmp_path, a, b, hold="0.05"):
    path = tmp_path / f"{a}{b}.wav"
    assert main(["synth", "--from", a, "--to", b, "--hold", hold, "--out", str(path)]) == 0
    return path


def test_analyze_pair(tmp_path):
    ai, ia = _synth(tmp_path, "a", "i"), _synth(tmp_path, "i", "a")
    seg = tmp_path / "seg.tsv"
    seg.write_text(f"ai\t{ai.name}\t0\t0.4\nia\t{ia.name}\t0\t0.4\n")
    stats, plot = tmp_path / "stats.csv", tmp_path / "plot.csv"
    assert main(["analyze", "--segments", str(seg), "--out-stats", str(stats), "--out-plot", str(plot)]) == 0
    rows = {r["label"]: r for r in csv.DictReader(open(stats))}
    assert set(rows) == {"ai", "ia"}
    assert 170 <= float(rows["ai"]["pair_sum_deg"]) <= 190
    traj = list(csv.DictReader(open(plot)))
    for label in ("ai", "ia"):
        t = np.array([float(r["time_s"]) for r in traj if r["label"] == label])
        ang = np.array([float(r["transition_angle_deg"]) for r in traj if r["label"] == label])
        assert np.all(np.diff(t) > 0) and np.all(np.isfinite(ang))


def test_analyze_empty(tmp_path):
    seg = tmp_path / "seg.tsv"
    seg.write_text("")
    stats = tmp_path / "stats.csv"
    assert main(["analyze", "--segments", str(seg), "--out-stats", str(stats)]) == 0
    assert stats.read_text() == "label,mean_angle_deg,std_angle_deg,n,n_excluded,pair_sum_deg\n"


def test_analyze_malformed_row(tmp_path, capsys):
    ai = _synth(tmp_path, "a", "i")
    seg = tmp_path / "seg.tsv"
    seg.write_text(f"ai\t{ai.name}\t0\t0.4\nbroken row\nai\t{ai.name}\tx\t1\n")
    stats = tmp_path / "stats.csv"
    assert main(["analyze", "--segments", str(seg), "--out-stats", str(stats)]) == 0
    err = capsys.readouterr().err
    assert "seg.tsv:2" in err and "seg.tsv:3" in err
    assert len(stats.read_text().splitlines()) == 2


def test_analyze_missing_audio_is_failure(tmp_path):
    seg = tmp_path / "seg.tsv"
    seg.write_text("ai\tnope.wav\t0\t0.4\n")
    assert main(["analyze", "--segments", str(seg), "--out-stats", str(tmp_path / "s.csv")]) == 1
