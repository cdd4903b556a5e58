import json
from pathlib import Path

import numpy as np
import pytest

from clawlab.cli import main
from clawlab.config import load_config, parse_config
from clawlab.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL_CONTRACTION = """
[flux]
name = burgers1d

[initial_data]
kind = box
height = 1.0
lo = -0.5
hi = 0.0

[initial_data2]
kind = box
height = 1.0
lo = -0.4
hi = 0.1

[grid]
lo = -3.0
hi = 3.0
nx = 600
dim = 1
t_end = 1.0
store_every = 10

[scheme]
kind = rusanov
cfl = 0.9
boundary = outflow

[output]
dir = out

[checks]
tasks = cone, glob

[check.cone]
kind = cone_contraction
r = 2.0

[check.glob]
kind = global_contraction
r_list = 1, 2, 4, 8
"""


class TestConfigParsing:
    def test_roundtrip_lossless(self):
        cfg = parse_config(SMALL_CONTRACTION)
        text = cfg.to_text()
        again = parse_config(text)
        assert again == cfg
        assert again.to_text() == text

    def test_unknown_key_named(self):
        bad = SMALL_CONTRACTION.replace("[flux]\nname = burgers1d",
                                        "[flux]\nname = burgers1d\nfluxx = 2")
        with pytest.raises(ConfigError, match="fluxx"):
            parse_config(bad)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="mystery"):
            parse_config(SMALL_CONTRACTION + "\n[mystery]\na = 1\n")

    def test_unknown_flux_rejected(self):
        with pytest.raises(ConfigError, match="nope"):
            parse_config(SMALL_CONTRACTION.replace("name = burgers1d",
                                                   "name = nope"))

    def test_missing_grid_key(self):
        with pytest.raises(ConfigError, match="nx"):
            parse_config(SMALL_CONTRACTION.replace("nx = 600\n", ""))

    def test_pair_check_requires_second_data(self):
        text = SMALL_CONTRACTION.replace(
            "[initial_data2]\nkind = box\nheight = 1.0\nlo = -0.4\nhi = 0.1\n",
            "")
        with pytest.raises(ConfigError, match="initial_data2"):
            parse_config(text)

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(SMALL_CONTRACTION.replace(
                "cfl = 0.9", "cfl = 0.9\ncfl = 0.5"))

    def test_line_numbers_in_errors(self):
        bad = "[flux]\nname = burgers1d\nbroken_line_without_equals\n"
        with pytest.raises(ConfigError, match="line 3"):
            parse_config(bad)

    def test_bundled_configs_parse(self):
        for name in ("burgers_contraction.cfg", "uniqueness_burgers.cfg",
                     "entropy_burgers.cfg"):
            cfg = load_config(CONFIGS / name)
            assert cfg.grid.nx > 0

    def test_flux_params_addressable(self):
        text = SMALL_CONTRACTION.replace(
            "[flux]\nname = burgers1d",
            "[flux]\nname = advection1d\nc = 3.0")
        cfg = parse_config(text)
        assert cfg.flux_params == {"c": 3.0}
        with pytest.raises(ConfigError, match="speed"):
            parse_config(SMALL_CONTRACTION.replace(
                "[flux]\nname = burgers1d",
                "[flux]\nname = advection1d\nspeed = 3.0"))

    def test_riemann_x0_optional(self):
        text = (CONFIGS / "uniqueness_burgers.cfg").read_text()
        cfg = parse_config(text.replace("x0 = 0.0\n", ""))
        vals = cfg.initial_data(np.array([[-0.1], [0.1]]))
        assert vals.tolist() == [1.0, 0.0]

    def test_bundled_configs_roundtrip(self):
        for name in ("burgers_contraction.cfg", "uniqueness_burgers.cfg",
                     "entropy_burgers.cfg"):
            cfg = load_config(CONFIGS / name)
            assert parse_config(cfg.to_text()) == cfg


class TestCliRun:
    def run_small(self, tmp_path, name="run1", extra=()):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONTRACTION.replace(
            "dir = out", f"dir = {tmp_path / name}"))
        return main(["run", str(cfg_path), *extra]), tmp_path / name

    def test_run_produces_artifacts(self, tmp_path):
        code, outdir = self.run_small(tmp_path)
        assert code == 0
        for expected in ("config.cfg", "summary.txt", "summary.csv", "u.csv",
                         "v.csv", "report_cone.json", "report_glob.json",
                         "profile_cone.csv", "u_snapshots.svg"):
            assert (outdir / expected).exists(), expected
        assert not (outdir / "FAILED").exists()
        profile = (outdir / "profile_cone.csv").read_text().splitlines()
        assert profile[0] == "t,radius,l1_mass"
        masses = [float(r.split(",")[2]) for r in profile[1:]]
        rep = json.loads((outdir / "report_cone.json").read_text())
        tol = rep["tolerance"]
        assert all(b <= a + tol for a, b in zip(masses, masses[1:]))

    def test_refuses_overwrite_without_force(self, tmp_path):
        code, outdir = self.run_small(tmp_path)
        assert code == 0
        cfg_path = tmp_path / "exp.cfg"
        assert main(["run", str(cfg_path)]) == 2
        assert main(["run", str(cfg_path), "--force"]) == 0

    def test_determinism_bitwise(self, tmp_path):
        _, out1 = self.run_small(tmp_path, name="a")
        cfg_path = tmp_path / "exp2.cfg"
        cfg_path.write_text(SMALL_CONTRACTION.replace(
            "dir = out", f"dir = {tmp_path / 'b'}"))
        assert main(["run", str(cfg_path)]) == 0
        for rel in ("u.csv", "v.csv", "profile_cone.csv", "summary.csv"):
            assert (out1 / rel).read_bytes() == \
                (tmp_path / "b" / rel).read_bytes()

    def test_failed_marker_on_error(self, tmp_path):
        # cone radius far beyond the domain: lipschitz fine but the first
        # usable level check dies on the empty cone? use a kato support
        # violation instead: rho/tau beyond stored horizon
        text = SMALL_CONTRACTION.replace(
            "tasks = cone, glob", "tasks = kato_bad").replace(
            "[check.cone]\nkind = cone_contraction\nr = 2.0",
            "[check.kato_bad]\nkind = kato\nr = 2.0\nrho = 1.5\n"
            "tau = 1.8\nh = 0.1\neps = 0.2").replace(
            "[check.glob]\nkind = global_contraction\nr_list = 1, 2, 4, 8",
            "")
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text(text.replace("dir = out", f"dir = {tmp_path / 'bad'}"))
        assert main(["run", str(cfg_path)]) == 2
        assert (tmp_path / "bad" / "FAILED").exists()

    def test_two_dimensional_run(self, tmp_path):
        text = "\n".join([
            "[flux]", "name = burgers2d", "",
            "[initial_data]", "kind = box", "height = 1.0", "lo = -0.3",
            "hi = 0.1", "",
            "[initial_data2]", "kind = box", "height = 1.0", "lo = -0.2",
            "hi = 0.2", "",
            "[grid]", "lo = -2.0", "hi = 2.0", "nx = 48", "dim = 2",
            "t_end = 0.4", "store_every = 8", "",
            "[scheme]", "kind = rusanov", "cfl = 0.9",
            "boundary = outflow", "",
            "[output]", f"dir = {tmp_path / 'run2d'}", "",
            "[checks]", "tasks = cone", "",
            "[check.cone]", "kind = cone_contraction", "r = 1.5", "",
        ])
        cfg_path = tmp_path / "two_d.cfg"
        cfg_path.write_text(text)
        assert main(["run", str(cfg_path)]) == 0
        rep = json.loads((tmp_path / "run2d" / "report_cone.json").read_text())
        assert rep["passed"] is True
        assert (tmp_path / "run2d" / "u.csv").exists()

    def test_env_var_root(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CLAWLAB_OUT", str(tmp_path / "root"))
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(SMALL_CONTRACTION)  # relative dir = out
        assert main(["run", str(cfg_path)]) == 0
        assert (tmp_path / "root" / "out" / "summary.txt").exists()


class TestCliOther:
    def test_catalog_list(self, capsys):
        assert main(["catalog", "list"]) == 0
        out = capsys.readouterr().out
        assert "burgers1d" in out and "xsquared1d" in out

    def test_verify_on_stored_fields(self, tmp_path, capsys):
        code, outdir = TestCliRun().run_small(tmp_path)
        assert code == 0
        capsys.readouterr()   # drain the run output
        code = main(["verify", str(outdir / "u_slabs"), str(outdir / "v_slabs"),
                     "--check", "cone_contraction", "--flux", "burgers1d",
                     "--set", "r=2.0"])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["kind"] == "cone_contraction"
        assert rep["passed"] is True

    def test_verify_reads_csv(self, tmp_path, capsys):
        code, outdir = TestCliRun().run_small(tmp_path)
        code = main(["verify", str(outdir / "u.csv"), str(outdir / "v.csv"),
                     "--check", "global_contraction", "--flux", "burgers1d",
                     "--set", "r_list=1,2,4"])
        assert code == 0

    def test_bundled_uniqueness_run_passes(self, tmp_path):
        text = (CONFIGS / "uniqueness_burgers.cfg").read_text()
        text = text.replace("nx = 250", "nx = 120").replace(
            "dir = runs/uniqueness_burgers", f"dir = {tmp_path / 'uniq'}")
        cfg_path = tmp_path / "uniq.cfg"
        cfg_path.write_text(text)
        assert main(["run", str(cfg_path)]) == 0
        rep = json.loads((tmp_path / "uniq" / "report_uniq.json").read_text())
        assert rep["passed"] is True
        assert all(r >= 1.5 for r in rep["metadata"]["ratios"])

    def test_bundled_entropy_run_passes(self, tmp_path):
        text = (CONFIGS / "entropy_burgers.cfg").read_text()
        text = text.replace("nx = 800", "nx = 400").replace(
            "points = 6", "points = 4").replace(
            "dir = runs/entropy_burgers", f"dir = {tmp_path / 'ent'}")
        cfg_path = tmp_path / "ent.cfg"
        cfg_path.write_text(text)
        assert main(["run", str(cfg_path)]) == 0
        rep = json.loads((tmp_path / "ent" / "report_entropy.json").read_text())
        assert rep["passed"] is True
        assert len(rep["metadata"]["sweep"]) == 12   # 9 kruzkov + 3 smooth

    def test_verify_kato_from_files(self, tmp_path, capsys):
        code, outdir = TestCliRun().run_small(tmp_path)
        capsys.readouterr()
        code = main(["verify", str(outdir / "u_slabs"), str(outdir / "v_slabs"),
                     "--check", "kato", "--flux", "burgers1d",
                     "--set", "r=2.0", "--set", "rho=0.25", "--set", "tau=0.75",
                     "--set", "h=0.1", "--set", "eps=0.2"])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["kind"] == "kato" and rep["passed"] is True

    def test_verify_entropy_on_single_field(self, tmp_path, capsys):
        code, outdir = TestCliRun().run_small(tmp_path)
        capsys.readouterr()
        code = main(["verify", str(outdir / "u.csv"),
                     "--check", "entropy_inequality", "--flux", "burgers1d",
                     "--set", "k0=0.5", "--set", "phi_radius=1.0"])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["kind"] == "entropy_inequality"

    def test_study_smooth_self_convergence(self, tmp_path, capsys):
        text = "\n".join([
            "[flux]", "name = burgers1d", "",
            "[initial_data]", "kind = sine", "amp = 0.3", "freq = 1.0",
            "offset = 0.5", "",
            "[grid]", "lo = -1.0", "hi = 1.0", "nx = 100", "dim = 1",
            "t_end = 0.3", "store_every = 1000000", "",
            "[scheme]", "kind = rusanov", "cfl = 0.9",
            "boundary = periodic", "",
            "[output]", f"dir = {tmp_path / 'smooth'}", "",
        ])
        cfg_path = tmp_path / "smooth.cfg"
        cfg_path.write_text(text)
        assert main(["study", str(cfg_path), "--levels", "3"]) == 0
        study = (tmp_path / "smooth" / "study.csv").read_text().splitlines()
        orders = [float(r.split(",")[2]) for r in study[2:] if r.split(",")[2]]
        assert all(0.8 <= o <= 1.3 for o in orders)

    def test_study_produces_orders(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        text = (Path(CONFIGS) / "uniqueness_burgers.cfg").read_text()
        text = text.replace("nx = 250", "nx = 100").replace(
            "dir = runs/uniqueness_burgers", f"dir = {tmp_path / 'study'}")
        cfg_path.write_text(text)
        assert main(["study", str(cfg_path), "--levels", "3"]) == 0
        out = capsys.readouterr().out
        assert "order" in out
        study = (tmp_path / "study" / "study.csv").read_text().splitlines()
        orders = [float(r.split(",")[2]) for r in study[2:]]
        assert all(0.5 <= o <= 1.2 for o in orders)

    def test_exit_code_on_failed_check(self, tmp_path):
        # an anti-pair run: expansion-shock initial data evolves to the
        # rarefaction, so comparing against a frozen non-entropic profile
        # is not possible through the CLI; instead force failure via a
        # wrong-direction uniqueness ratio threshold
        text = (CONFIGS / "uniqueness_burgers.cfg").read_text()
        text = text.replace("nx = 250", "nx = 80").replace(
            "min_ratio = 1.5", "min_ratio = 50.0").replace(
            "dir = runs/uniqueness_burgers", f"dir = {tmp_path / 'fail'}")
        cfg_path = tmp_path / "fail.cfg"
        cfg_path.write_text(text)
        assert main(["run", str(cfg_path)]) == 1
