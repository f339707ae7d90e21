import textwrap

from pksmri.cli import main
from pksmri.rawio import read_mask_raw, read_raw


def test_gen_mask_deterministic(tmp_path):
    a, b = tmp_path / "a.raw", tmp_path / "b.raw"
    args = ["gen-mask", "--family", "cartesian1d", "--R", "2", "--size", "64", "--seed", "1"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.with_suffix(".png").read_bytes() == b.with_suffix(".png").read_bytes()
    assert read_mask_raw(a).indicator.sum() == 32 * 64


def test_phantom_recon_metrics(tmp_path, capsys):
    ph = tmp_path / "ph"
    assert main(["gen-phantom", "--size", "32", "--coils", "2", "--out", str(ph)]) == 0
    assert {p.name for p in ph.glob("*.raw")} == {"T1.raw", "T2.raw", "PD.raw"}
    mask = tmp_path / "mask.raw"
    assert main(["gen-mask", "--family", "random2d", "--R", "2", "--size", "32", "--out", str(mask)]) == 0
    out = tmp_path / "rec.raw"
    rc = main(["recon", str(ph / "T2.raw"), "--mask", str(mask), "--method", "pks", "--aux", str(ph / "T1.raw"),
               "--iters", "3", "--out", str(out), "--truth", str(ph / "T2.raw")])
    assert rc == 0 and read_raw(out).shape == (2, 32, 32)
    capsys.readouterr()
    assert main(["metrics", str(ph / "T2.raw"), str(ph / "T2.raw")]) == 0
    assert capsys.readouterr().out.split() == ["psnr_db=99.0", "ssim=1.0"]


def test_experiment_smoke(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(textwrap.dedent("""
        seed = 1
        [phantom]
        size = 32
        n_coils = 2
        [solver]
        max_iters = 2
        [[masks]]
        family = "random2d"
        R = 3
        [[variants]]
        name = "zf"
        kind = "zero_filled"
        [[variants]]
        name = "sake"
        kind = "sake"
        [[variants]]
        name = "pks"
        kind = "pks"
        auxiliaries = ["T1"]
    """))
    out = tmp_path / "out"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "results.csv").exists()
    assert len(list(out.glob("*.png"))) >= 6


def test_usage_errors(tmp_path, capsys):
    assert main(["gen-mask", "--bogus"]) == 2
    assert main([]) == 2
    assert main(["experiment"]) == 2
    assert main(["experiment", "--config", str(tmp_path / "missing.toml")]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("this is = = not toml")
    assert main(["experiment", "--config", str(bad)]) == 2


def test_stage_errors(tmp_path, capsys):
    mask = tmp_path / "m.raw"
    main(["gen-mask", "--size", "16", "--out", str(mask)])
    trunc = tmp_path / "t.raw"
    trunc.write_bytes(mask.read_bytes()[:-4])
    assert main(["metrics", str(trunc), str(mask)]) == 4
    assert "metrics" in capsys.readouterr().err
    assert main(["gen-mask", "--family", "poisson2d", "--R", "40", "--size", "8", "--out", str(mask)]) == 1
    assert "mask stage failed" in capsys.readouterr().err
