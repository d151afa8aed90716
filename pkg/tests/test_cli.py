import csv
import json
import math

import numpy as np
import pytest

import zrtrimer.cli as cli
from zrtrimer import PairParams, dimer_pole_kappa, efimov_constant
from zrtrimer.angular import RootSearchError, dimer_channel_u

from conftest import HE4_A, HE4_P, HE4_REFF, MU4, bundled_config_text

FAST_CFG = """
[system]
names = He4, He4, He4
masses = 4.002603, 4.002603, 4.002603

[pair.1]
a = -189.054
r_eff = 13.843
p_shape = 0.13

[pair.2]
a = -189.054
r_eff = 13.843
p_shape = 0.13

[pair.3]
a = -189.054
r_eff = 13.843
p_shape = 0.13

[grid]
rho_min = 0.05
rho_max = 400
n = 80
"""


@pytest.fixture(scope="module")
def he4_cfg_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "he4_trimer.cfg"
    p.write_text(bundled_config_text("he4_trimer"))
    return str(p)


@pytest.fixture(scope="module")
def fast_cfg_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "fast.cfg"
    p.write_text(FAST_CFG)
    return str(p)


def read_csv(path):
    meta, columns, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[2:].partition("=")
                meta[key] = value
            elif columns is None:
                columns = line.split(",")
            else:
                rows.append(line.split(","))
    return meta, columns, rows


class TestSolveCommand:
    def test_solve_json(self, he4_cfg_path, tmp_path, capsys):
        out = tmp_path / "spectrum.json"
        rc = cli.main(["solve", "--config", he4_cfg_path, "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["threshold_mK"] == pytest.approx(-1.2109, abs=2e-4)
        states = payload["states"]
        assert [s["nodes"] for s in states] == [0, 1]
        assert states[0]["E_mK"] == pytest.approx(-144.0556, abs=0.01)
        assert states[1]["E_mK"] == pytest.approx(-2.22049, abs=0.001)
        assert payload["meta"]["command"] == "solve"
        assert len(payload["meta"]["config_sha256"]) == 64

    def test_solve_validates_against_schema(self, he4_cfg_path, tmp_path):
        jsonschema = pytest.importorskip("jsonschema")
        import importlib.resources as ir
        out = tmp_path / "spectrum.json"
        assert cli.main(["solve", "--config", he4_cfg_path, "--out", str(out)]) == 0
        schema = json.loads(
            (ir.files("zrtrimer") / "data" / "solve_output.schema.json").read_text())
        jsonschema.validate(json.loads(out.read_text()), schema)

    def test_solve_determinism(self, fast_cfg_path, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert cli.main(["solve", "--config", fast_cfg_path, "--out", str(a)]) == 0
        assert cli.main(["solve", "--config", fast_cfg_path, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestEigenvalueCommand:
    def test_rows_and_endpoints(self, he4_cfg_path, tmp_path):
        out = tmp_path / "eig.csv"
        rc = cli.main(["eigenvalue", "--config", he4_cfg_path, "--out", str(out)])
        assert rc == 0
        meta, columns, rows = read_csv(out)
        assert columns == ["rho_au", "nu2", "lambda", "W_au"]
        assert len(rows) == 600          # row count equals grid n
        first = [float(x) for x in rows[0]]
        assert first[2] == pytest.approx(-4.0, abs=0.05)        # lambda(rho_min)
        # the last rows sit on the extended dimer-channel asymptote
        kappa = dimer_pole_kappa(PairParams(a=HE4_A, r_eff=HE4_REFF,
                                            p_shape=HE4_P))
        last = [float(x) for x in rows[-1]]
        lam_tail = dimer_channel_u(last[0], kappa, MU4) - 4.0
        assert last[2] == pytest.approx(lam_tail, rel=0.02)
        assert meta["command"] == "eigenvalue"

    def test_determinism(self, fast_cfg_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["eigenvalue", "--config", fast_cfg_path, "--out", str(a)]) == 0
        assert cli.main(["eigenvalue", "--config", fast_cfg_path, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_json_format_flag(self, fast_cfg_path, tmp_path):
        out = tmp_path / "eig.json"
        rc = cli.main(["eigenvalue", "--config", fast_cfg_path,
                       "--format", "json", "--out", str(out)])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert len(payload["rows"]) == 80
        assert set(payload["rows"][0]) == {"rho_au", "nu2", "lambda", "W_au"}

    def test_linear_spacing(self, tmp_path):
        cfg = tmp_path / "lin.cfg"
        cfg.write_text(FAST_CFG.replace(
            "rho_min = 0.05\nrho_max = 400\nn = 80",
            "rho_min = 1\nrho_max = 100\nn = 60\nspacing = linear"))
        out = tmp_path / "lin.csv"
        assert cli.main(["eigenvalue", "--config", str(cfg),
                         "--out", str(out)]) == 0
        _, _, rows = read_csv(out)
        rho = [float(r[0]) for r in rows]
        steps = np.diff(rho)
        assert np.allclose(steps, steps[0])
        assert rho[0] == 1.0 and rho[-1] == 100.0

    def test_mixed_system_determinant_route(self, tmp_path):
        import importlib.resources as ir
        cfg_path = tmp_path / "mixed.cfg"
        text = (ir.files("zrtrimer") / "data" / "he4he4he3.cfg").read_text()
        cfg_path.write_text(text.replace("n = 600", "n = 120"))
        out = tmp_path / "mixed.csv"
        assert cli.main(["eigenvalue", "--config", str(cfg_path),
                         "--out", str(out)]) == 0
        _, _, rows = read_csv(out)
        first, last = [float(x) for x in rows[0]], [float(x) for x in rows[-1]]
        assert first[2] == pytest.approx(-4.0, abs=0.05)
        # outermost row sits on the He4-He4 dimer parabola of the mixed frame
        kappa = dimer_pole_kappa(PairParams(a=HE4_A, r_eff=HE4_REFF,
                                            p_shape=HE4_P))
        assert last[1] == pytest.approx(-kappa ** 2 * last[0] ** 2 / MU4,
                                        rel=0.02)


class TestScanCommand:
    def test_single_point(self, he4_cfg_path, tmp_path):
        out = tmp_path / "scan.csv"
        rc = cli.main(["scan-p", "--config", he4_cfg_path,
                       "--p-min", "0.13", "--p-max", "0.13",
                       "--p-step", "0.005", "--out", str(out)])
        assert rc == 0
        _, columns, rows = read_csv(out)
        assert columns == ["P", "E0_mK", "E1_mK"]
        assert len(rows) == 1
        assert float(rows[0][1]) == pytest.approx(-144.0556, abs=0.01)

    def test_bad_step(self, he4_cfg_path):
        assert cli.main(["scan-p", "--config", he4_cfg_path,
                         "--p-step", "0"]) == 1


class TestThomasCommand:
    def test_default_g_and_ratio_column(self, tmp_path):
        out = tmp_path / "thomas.csv"
        rc = cli.main(["thomas-demo", "--out", str(out)])
        assert rc == 0
        meta, columns, rows = read_csv(out)
        assert columns == ["n", "E_hartree", "ratio"]
        assert float(meta["g"]) == pytest.approx(efimov_constant(), rel=1e-9)
        assert len(rows) == 5
        assert rows[-1][2] == ""                 # no ratio after the last level
        ratios = [float(r[2]) for r in rows[:-1]]
        target = math.exp(2 * math.pi / efimov_constant())
        assert ratios[1] == pytest.approx(target, rel=0.05)
        assert ratios[2] == pytest.approx(target, rel=0.05)


class TestWavefunctionCommand:
    def test_ground_state_shape(self, he4_cfg_path, tmp_path):
        out = tmp_path / "wf0.csv"
        rc = cli.main(["wavefunction", "--config", he4_cfg_path,
                       "--state", "0", "--out", str(out)])
        assert rc == 0
        _, columns, rows = read_csv(out)
        assert columns == ["rho_au", "f"]
        data = np.array([[float(a) for a in row] for row in rows])
        f = data[:, 1]
        assert np.abs(f).max() == pytest.approx(1.0, rel=1e-9)
        peak_rho = data[np.abs(f).argmax(), 0]
        assert 10.0 < peak_rho < 40.0
        # single-peaked: no sign change
        from zrtrimer import count_nodes
        assert count_nodes(f) == 0

    def test_excited_state_has_one_node(self, he4_cfg_path, tmp_path):
        out = tmp_path / "wf1.csv"
        assert cli.main(["wavefunction", "--config", he4_cfg_path,
                         "--state", "1", "--out", str(out)]) == 0
        _, _, rows = read_csv(out)
        from zrtrimer import count_nodes
        assert count_nodes([float(r[1]) for r in rows]) == 1

    def test_missing_state_is_usage_error(self, he4_cfg_path):
        assert cli.main(["wavefunction", "--config", he4_cfg_path,
                         "--state", "7"]) == 1


class TestExitCodes:
    def test_missing_config(self):
        assert cli.main(["solve", "--config", "/no/such/file.cfg"]) == 1

    def test_invalid_config(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("[system]\nmasses = 1, 2\n")
        assert cli.main(["solve", "--config", str(bad)]) == 1

    def test_usage_error(self):
        assert cli.main(["no-such-command"]) == 1

    def test_solver_failure_maps_to_2(self, he4_cfg_path, monkeypatch):
        def boom(cfg):
            raise RootSearchError("lost the branch")
        monkeypatch.setattr(cli, "potential_for_config", boom)
        assert cli.main(["solve", "--config", he4_cfg_path]) == 2

    def test_stdout_output(self, fast_cfg_path, capsys):
        assert cli.main(["eigenvalue", "--config", fast_cfg_path]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[-1].count(",") == 3
