import json

import pytest

from certikit import Certificate, dataset, dpoint, load_dataset, save_dataset, vpoint
from certikit.cli import main, parse_class, parse_dist, parse_point
from certikit.config import parse_config_text
from certikit.errors import InputError


@pytest.fixture
def discrete_csv(tmp_path):
    path = tmp_path / "data.csv"
    save_dataset(dataset([(dpoint(1), -1), (dpoint(2), -1)]), path)
    return str(path)


@pytest.fixture
def vector_csv(tmp_path):
    path = tmp_path / "vec.csv"
    save_dataset(
        dataset([(vpoint(1, 0), 1), (vpoint(0, 1), 1), (vpoint(1, 1), 1)]), path
    )
    return str(path)


class TestParsers:
    def test_parse_class(self):
        assert parse_class("singletons:n=5").num_hypotheses == 5
        half = parse_class("halfspace:d=3")
        assert half.dim == 3 and not half.affine
        aff = parse_class("affine-halfspace:d=3")
        assert aff.affine
        with pytest.raises(InputError):
            parse_class("mystery:x=1")

    def test_parse_point(self):
        assert parse_point("3").discrete == 3
        assert parse_point("0.5,0.0").vector == (0.5, 0.0)

    def test_parse_dist(self):
        d = parse_dist("uniform:ids=1,2")
        assert len(d.points) == 2
        ball = parse_dist("ball:center=0,0;radius=2")
        assert ball.radius == 2.0


class TestConfig:
    def test_parse_and_defaults(self):
        cfg = parse_config_text(
            """
            # star search
            command = star
            class = singletons:n=3
            b = 1
            seed = 9
            """
        )
        assert cfg.command == "star" and cfg.seed == 9
        assert cfg.get("class") == "singletons:n=3"

    def test_unknown_key_rejected(self):
        with pytest.raises(InputError):
            parse_config_text("command = star\nclasss = singletons:n=3\n")

    def test_unknown_command_rejected(self):
        with pytest.raises(InputError):
            parse_config_text("command = fly\n")

    def test_duplicate_keys_rejected(self):
        with pytest.raises(InputError):
            parse_config_text("command = star\nb = 1\nb = 2\n")


class TestSubcommands:
    def test_star_singletons(self, capsys):
        code = main(["star", "--class", "singletons:n=3", "--b", "1"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["s_b"] == 5

    def test_agree(self, capsys, discrete_csv):
        code = main(
            [
                "agree",
                "--class",
                "singletons:n=3",
                "--data",
                discrete_csv,
                "--b",
                "0",
                "--test",
                "3",
                "--label",
                "1",
            ]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["in_robust_agreement"] is True

    def test_certify_greedy(self, capsys, discrete_csv):
        code = main(
            [
                "certify",
                "--method",
                "greedy",
                "--class",
                "singletons:n=3",
                "--data",
                discrete_csv,
                "--b",
                "0",
                "--test",
                "3",
                "--label",
                "1",
            ]
        )
        assert code == 0
        cert = json.loads(capsys.readouterr().out)
        assert cert["indices"] == [0, 1] and cert["minimal"] is True

    def test_certify_caratheodory(self, capsys, vector_csv):
        code = main(
            [
                "certify",
                "--method",
                "caratheodory",
                "--class",
                "halfspace:d=2",
                "--data",
                vector_csv,
                "--test",
                "2.0,1.0",
                "--label",
                "1",
            ]
        )
        assert code == 0
        cert = json.loads(capsys.readouterr().out)
        assert len(cert["indices"]) <= 2

    def test_not_certifiable_exit_code(self, discrete_csv):
        code = main(
            [
                "certify",
                "--method",
                "greedy",
                "--class",
                "singletons:n=3",
                "--data",
                discrete_csv,
                "--b",
                "1",
                "--test",
                "3",
                "--label",
                "1",
            ]
        )
        assert code == 5

    def test_conic_dump(self, capsys, vector_csv):
        code = main(
            ["conic", "--data", vector_csv, "--test", "2.0,1.0", "--label", "1", "--dump"]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["feasible"] and len(payload["support"]) <= 2

    def test_coeff(self, capsys):
        code = main(
            [
                "coeff",
                "--class",
                "singletons:n=3",
                "--dist",
                "uniform:ids=1,2",
                "--target",
                "2",
                "--test",
                "3",
            ]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["eps"] == 0.5

    def test_curve_zero_eps_exits_5(self):
        code = main(
            [
                "curve",
                "--class",
                "singletons:n=3",
                "--dist",
                "uniform:ids=1",
                "--target",
                "2",
                "--test",
                "3",
                "--m-grid",
                "1,2",
                "--trials",
                "5",
            ]
        )
        assert code == 5

    def test_attack_random(self, capsys, discrete_csv, tmp_path):
        out = tmp_path / "art"
        code = main(
            [
                "attack",
                "--mode",
                "random",
                "--class",
                "singletons:n=3",
                "--data",
                discrete_csv,
                "--b",
                "1",
                "--seed",
                "3",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        corrupted = load_dataset(out / "corrupted.csv")
        assert len(corrupted.flipped_indices) == 0  # flips live in the report
        report = json.loads((out / "attack.json").read_text())
        assert len(report["flipped"]) == 1


class TestRun:
    def write_config(self, tmp_path, text):
        path = tmp_path / "exp.cfg"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_star_run_with_manifest(self, tmp_path, capsys):
        out = tmp_path / "results"
        cfg = self.write_config(
            tmp_path,
            f"command = star\nclass = singletons:n=3\nb = 1\nseed = 4\nout = {out}\n",
        )
        assert main(["run", "--config", cfg]) == 0
        payload = json.loads((out / "star.json").read_text())
        assert payload["s_b"] == 5
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "star" and manifest["seed"] == 4
        assert "config_sha256" in manifest and manifest["artifacts"]

    def test_rerun_byte_identical_csv(self, tmp_path, capsys):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        base = (
            "command = curve\nclass = singletons:n=3\ndist = uniform:ids=1,2\n"
            "target = 2\ntest = 3\nb = 0\nm_grid = 1,2,4\ntrials = 30\nseed = 11\n"
        )
        cfg_a = self.write_config(tmp_path, base + f"out = {out_a}\n")
        assert main(["run", "--config", cfg_a]) == 0
        cfg_b = (tmp_path / "exp2.cfg")
        cfg_b.write_text(base + f"out = {out_b}\n", encoding="utf-8")
        assert main(["run", "--config", str(cfg_b)]) == 0
        assert (out_a / "curve.csv").read_bytes() == (out_b / "curve.csv").read_bytes()

    def test_bad_config_exit_2(self, tmp_path):
        cfg = self.write_config(tmp_path, "command = star\nwat = 1\n")
        assert main(["run", "--config", cfg]) == 2
