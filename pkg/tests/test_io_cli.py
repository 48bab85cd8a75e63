import json

import numpy as np
import pytest

from pptmix import cli, io
from pptmix.linalg import Bipartition
from pptmix.states import ghz, projector, random_density_hs, w_state, white_noise_mix
from pptmix.witness import detect_gme, verify_certificate


@pytest.fixture
def ghz_half(tmp_path):
    path = tmp_path / "ghz.json"
    io.write_state(path, white_noise_mix(ghz(3), 0.5))
    return path


# -- file formats -------------------------------------------------------------------


def test_state_round_trip_bit_identical(tmp_path):
    rho = random_density_hs(8, 21)
    path = tmp_path / "s.json"
    io.write_state(path, rho, {"origin": "test"})
    back = io.read_state(path)
    assert back.matrix.tobytes() == rho.astype(complex).tobytes()
    assert back.dims == [2, 2, 2] and back.metadata == {"origin": "test"}


def test_witness_round_trip_bit_identical(tmp_path):
    res = detect_gme(white_noise_mix(ghz(3), 0.5))
    wf = io.witness_file(res.certificate.w, "full", res.certificate, {"seed": 0})
    path = tmp_path / "w.json"
    io.write_witness(path, wf)
    back = io.read_witness(path)
    assert back.pauli == wf.pauli
    cert = back.decode_certificate()
    for m in res.certificate.p:
        assert cert.p[m].tobytes() == res.certificate.p[m].astype(complex).tobytes()
        assert cert.q[m].tobytes() == res.certificate.q[m].astype(complex).tobytes()
    assert verify_certificate(cert).passed
    assert np.abs(back.matrix() - cert.w).max() <= 1e-9


@pytest.mark.parametrize(
    "payload,fragment",
    [
        ('{"format-version": 1, "dims": [2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]', "line"),
        ('{"format-version": 2, "dims": [2], "matrix": []}', "format-version"),
        ('{"format-version": 1, "dims": [2, 2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}', "does not match"),
        ('{"format-version": 1, "dims": [2], "matrix": [[[2, 0], [0, 0]], [[0, 0], [0, 0]]]}', "density"),
        ('{"format-version": 1, "matrix": []}', "dims"),
        ("[1, 2]", "object"),
    ],
)
def test_malformed_state_files(tmp_path, payload, fragment):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    with pytest.raises(io.FormatError, match=fragment):
        io.read_state(path)


def test_read_observables_formats(tmp_path):
    a = tmp_path / "a.json"
    a.write_text(json.dumps(["xxx", "ZZI"]))
    b = tmp_path / "b.txt"
    b.write_text("XXX  # setting\n\nZZI\n")
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"observables": ["XXX", "ZZI"]}))
    assert io.read_observables(a) == io.read_observables(b) == io.read_observables(c) == ["XXX", "ZZI"]
    bad = tmp_path / "d.txt"
    bad.write_text("XQX\n")
    with pytest.raises(io.FormatError):
        io.read_observables(bad)


def test_pauli_terms_drop_zeros():
    terms = io.pauli_terms(np.eye(4) / 4)
    assert terms == [("II", 0.25)]


# -- commands -------------------------------------------------------------------------


def test_detect_exit_codes(tmp_path, ghz_half, capsys):
    out = tmp_path / "w.json"
    assert cli.main(["detect", str(ghz_half), "--out", str(out)]) == cli.EXIT_DETECTED
    mixed = tmp_path / "mixed.json"
    io.write_state(mixed, np.eye(8) / 8)
    assert cli.main(["detect", str(mixed)]) == cli.EXIT_NOT_DETECTED
    truncated = tmp_path / "trunc.json"
    truncated.write_text(ghz_half.read_text()[:200])
    assert cli.main(["detect", str(truncated)]) == cli.EXIT_ERROR
    assert "invalid JSON at line" in capsys.readouterr().err
    assert cli.main(["detect", str(tmp_path / "missing.json")]) == cli.EXIT_ERROR


def test_detect_witness_file_reverifies(tmp_path, ghz_half):
    out = tmp_path / "w.json"
    cli.main(["detect", str(ghz_half), "--out", str(out)])
    wf = io.read_witness(out)
    cert = wf.decode_certificate()
    assert verify_certificate(cert).passed
    assert np.abs(wf.matrix() - cert.w).max() <= 1e-9
    assert {m for m in cert.p} == {Bipartition(3, (0,)), Bipartition(3, (0, 1)), Bipartition(3, (0, 2))}
    assert wf.provenance["solver"] == "pptmix.sdp"


def test_detect_restricted_modes(tmp_path, ghz_half):
    obs = tmp_path / "obs.txt"
    obs.write_text("XXX\nZZZ\n")
    light = tmp_path / "ghz02.json"
    io.write_state(light, white_noise_mix(ghz(3), 0.2))
    assert cli.main(["detect", str(light), "--mode", "restricted", "--observables", str(obs), "--closure"]) == 0
    # the two settings alone do not reach the p = 0.5 state
    assert cli.main(["detect", str(ghz_half), "--mode", "restricted", "--observables", str(obs), "--closure"]) == 1
    assert cli.main(["detect", str(ghz_half), "--mode", "restricted", "--observables", str(obs)]) == cli.EXIT_ERROR
    assert cli.main(["detect", str(ghz_half), "--mode", "restricted"]) == cli.EXIT_ERROR
    assert cli.main(["detect", str(ghz_half), "--mode", "fully-ppt"]) in (0, 1)


def test_state_command(tmp_path):
    out = tmp_path / "w3.json"
    assert cli.main(["state", "w3", "--noise", "0.53", "--out", str(out)]) == 0
    np.testing.assert_array_equal(io.read_state(out).matrix, white_noise_mix(w_state(3), 0.53))


def test_tolerance_command(capsys):
    assert cli.main(["tolerance", "cl4", "--method", "linear"]) == 0
    assert capsys.readouterr().out.startswith("p_tol = 0.615")
    assert cli.main(["tolerance", "ghz3"]) == 0
    out = capsys.readouterr().out
    lo, hi = (float(x) for x in out.split("[")[1].split("]")[0].split(","))
    assert lo <= 4 / 7 <= hi and hi - lo <= 5e-4
    assert abs(0.5 * (lo + hi) - 0.571) <= 1e-3
    assert cli.main(["tolerance", "nosuchstate"]) == cli.EXIT_ERROR


def test_tolerance_from_file(tmp_path, capsys):
    path = tmp_path / "ghz.json"
    io.write_state(path, projector(ghz(3)))
    assert cli.main(["tolerance", str(path), "--method", "linear"]) == 0
    assert "0.571" in capsys.readouterr().out
    mixed = tmp_path / "mixed.json"
    io.write_state(mixed, white_noise_mix(ghz(3), 0.2))
    assert cli.main(["tolerance", str(mixed)]) == cli.EXIT_ERROR


def test_cluster_witness_command(tmp_path, capsys):
    out = tmp_path / "cl4.json"
    assert cli.main(["cluster-witness", "4", "--frame", "zz", "--out", str(out)]) == 0
    terms = dict(io.read_witness(out).pauli)
    assert terms["ZZZZ"] == pytest.approx(-3 / 16)
    assert cli.main(["cluster-witness", "7", "--verify"]) == 0
    assert "63/63 bipartitions PSD" in capsys.readouterr().out
    assert cli.main(["cluster-witness", "3"]) == cli.EXIT_ERROR
    assert cli.main(["cluster-witness", "6", "--bset", "1,3"]) == cli.EXIT_ERROR


def test_monotone_command(tmp_path, capsys):
    path = tmp_path / "bell.json"
    io.write_state(path, projector(np.array([1, 0, 0, 1]) / np.sqrt(2)))
    assert cli.main(["monotone", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "0.500000"


def test_volume_command(capsys):
    assert cli.main(["volume", "--samples", "20", "--seed", "1"]) == 0
    assert "hs full:" in capsys.readouterr().out
    with pytest.raises(SystemExit) as exc:
        cli.main(["volume", "--samples", "20"])
    assert exc.value.code == cli.EXIT_ERROR


def test_bisep_command(tmp_path):
    path = tmp_path / "w3.json"
    io.write_state(path, white_noise_mix(w_state(3), 0.53))
    out = tmp_path / "dec.json"
    assert cli.main(["bisep", str(path), "--out", str(out)]) == cli.EXIT_DETECTED
    data = json.loads(out.read_text())
    parts = [io.StateFile.from_dict(p["component"]).matrix for p in data["parts"]]
    weights = [p["weight"] for p in data["parts"]]
    np.testing.assert_allclose(sum(w * c for w, c in zip(weights, parts)), white_noise_mix(w_state(3), 0.53), atol=1e-7)
    ghz_path = tmp_path / "ghz.json"
    io.write_state(ghz_path, projector(ghz(3)))
    assert cli.main(["bisep", str(ghz_path)]) == cli.EXIT_NOT_DETECTED


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "pptmix", "cluster-witness", "3"], capture_output=True, text=True)
    assert proc.returncode == cli.EXIT_ERROR
    assert "n >= 4" in proc.stderr
