import json
import subprocess
import sys

import numpy as np
import pytest

from chancompat import channels as ch, io
from chancompat.cli import main
from chancompat.linalg import frob


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_channel_file_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(0)
    c = ch.random_channel(2, 3, rng)
    path = tmp_path / "c.json"
    io.save_channel(str(path), c, label="sample")
    loaded, kraus, label = io.load_channel(str(path))
    assert kraus is None
    assert label == "sample"
    assert np.array_equal(loaded.choi, c.choi)
    # save -> load -> save is byte-identical
    path2 = tmp_path / "c2.json"
    io.save_channel(str(path2), loaded, label="sample")
    assert path.read_text() == path2.read_text()


def test_kraus_file_roundtrip(tmp_path):
    k = ch.self_complementary_qubit(1, 0.3, 0.9)
    path = tmp_path / "k.json"
    io.save_channel(str(path), k)
    loaded, kraus, _ = io.load_channel(str(path))
    assert kraus is not None
    for a, b in zip(k.operators, kraus.operators):
        assert np.array_equal(a, b)
    assert frob(loaded.choi - ch.choi_from_kraus(k).choi) < 1e-12


def test_load_rejects_invalid_documents(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(io.LoadError):
        io.load_channel(str(bad))
    bad.write_text(json.dumps({"dim_in": 2, "dim_out": 2}))
    with pytest.raises(io.LoadError):
        io.load_channel(str(bad))
    # non-CPTP choi is rejected with the violated bound reported
    bad.write_text(
        json.dumps(
            {
                "dim_in": 2,
                "dim_out": 2,
                "choi": [[[1.0, 0.0]] * 4] * 4,
            }
        )
    )
    with pytest.raises(io.LoadError):
        io.load_channel(str(bad))


def test_make_and_check_compat_identity(tmp_path, capsys):
    id_path = str(tmp_path / "id2.json")
    assert main(["make", "identity", "--dim", "2", "-o", id_path]) == 0
    capsys.readouterr()
    code, doc = run(capsys, "check", "compat", id_path, id_path)
    assert code == 1
    assert doc["status"] == "not-feasible-at-tolerance"
    assert "witness" not in doc
    assert any("heuristic" in w for w in doc["warnings"])


def test_check_div_identity_emits_identity_witness(tmp_path, capsys):
    id_path = str(tmp_path / "id2.json")
    main(["make", "identity", "--dim", "2", "-o", id_path])
    capsys.readouterr()
    code, doc = run(capsys, "check", "div", id_path, id_path)
    assert code == 0
    assert doc["status"] == "feasible"
    witness, _ = io.channel_from_json(doc["witness"], atol=1e-6)
    assert ch.choi_distance(witness, ch.identity(2)) < 1e-6


def test_reloaded_witness_meets_reported_residuals(tmp_path, capsys):
    stem = str(tmp_path / "ex2")
    main(["make", "example2", "-o", stem])
    capsys.readouterr()
    code, doc = run(capsys, "check", "compat", f"{stem}.psi.json", f"{stem}.phi.json")
    assert code == 0
    witness, _ = io.channel_from_json(doc["witness"], atol=1e-6)
    psi, _, _ = io.load_channel(f"{stem}.psi.json")
    phi, _, _ = io.load_channel(f"{stem}.phi.json")
    from chancompat import analysis as an

    res_b = an.marginal_deviation(witness, psi, (2, 2), keep=0)
    res_c = an.marginal_deviation(witness, phi, (2, 2), keep=1)
    assert max(res_b, res_c) <= doc["residuals"]["verification"] + 1e-12


def test_check_selfdeg_and_degradable(tmp_path, capsys):
    sc = str(tmp_path / "sc.json")
    main(["make", "selfcomp", "--family", "1", "--alpha", "0", "--beta", "0", "-o", sc])
    capsys.readouterr()
    code, doc = run(capsys, "check", "selfdeg", sc)
    assert code == 0 and doc["status"] == "feasible"
    code, doc = run(capsys, "check", "degradable", sc)
    assert code == 0 and doc["status"] == "feasible"
    code, doc = run(capsys, "check", "antidegradable", sc)
    assert code == 0


def test_selfdeg_unitary_reports_mismatch(tmp_path, capsys):
    u = str(tmp_path / "u.json")
    main(["make", "unitary", "--dim", "2", "--seed", "5", "-o", u])
    capsys.readouterr()
    code, doc = run(capsys, "check", "selfdeg", u)
    assert code == 1
    assert doc["residuals"]["verification"] is None  # infinite distance
    assert doc["environment_dim"] == 1


def test_complement_roundtrip(tmp_path, capsys):
    sc = str(tmp_path / "sc.json")
    out = str(tmp_path / "scc.json")
    main(["make", "selfcomp", "--alpha", "0", "--beta", "0", "-o", sc])
    assert main(["complement", sc, "-o", out]) == 0
    capsys.readouterr()
    comp, _, _ = io.load_channel(out)
    orig, _, _ = io.load_channel(sc)
    assert frob(comp.choi - orig.choi) < 1e-10  # self-complementary point


def test_verify_corollary_exit_zero(capsys):
    code, doc = run(
        capsys,
        "verify",
        "corollary",
        "--family",
        "1",
        "--alpha",
        "0",
        "--beta",
        "0",
        "--seed",
        "7",
        "--trials",
        "2",
        "--quiet",
    )
    assert code == 0
    assert doc["status"] == "feasible"
    assert all(s["status"] == "feasible" for s in doc["steps"])
    assert "witness" not in doc


def test_verify_family_from_files(tmp_path, capsys):
    id_path = str(tmp_path / "id2.json")
    main(["make", "identity", "--dim", "2", "-o", id_path])
    capsys.readouterr()
    code, doc = run(capsys, "verify", "family", id_path, id_path, id_path, "--quiet")
    assert code == 0
    assert len(doc["steps"]) == 2


def test_usage_errors_exit_three(tmp_path, capsys):
    missing = str(tmp_path / "nope.json")
    assert main(["check", "compat", missing, missing]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim_in": 2}')
    assert main(["check", "selfdeg", str(bad)]) == 3
    assert main(["check", "compat", str(bad)]) == 3  # wrong arity
    capsys.readouterr()


def test_quiet_flag_position_independent(tmp_path, capsys):
    id_path = str(tmp_path / "id2.json")
    main(["make", "identity", "--dim", "2", "-o", id_path])
    capsys.readouterr()
    _, doc1 = run(capsys, "--quiet", "check", "div", id_path, id_path)
    _, doc2 = run(capsys, "check", "div", id_path, id_path, "--quiet")
    assert "witness" not in doc1 and "witness" not in doc2


def test_make_unitary_from_matrix_file(tmp_path, capsys):
    u_mat = tmp_path / "u_mat.json"
    u_mat.write_text(json.dumps([[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]))
    out = str(tmp_path / "u.json")
    assert main(["make", "unitary", "--matrix", str(u_mat), "-o", out]) == 0
    capsys.readouterr()
    c, _, _ = io.load_channel(out)
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert ch.choi_distance(c, ch.unitary_channel(flip)) < 1e-12


def test_complement_of_choi_form_extracts_kraus(tmp_path, capsys):
    dep = str(tmp_path / "dep.json")
    out = str(tmp_path / "depc.json")
    main(["make", "depolarizing", "--dim", "2", "-o", dep])
    assert main(["complement", dep, "-o", out]) == 0
    err = capsys.readouterr().err
    assert "extracted" in err
    comp, _, _ = io.load_channel(out)
    assert comp.dim_out == 4  # canonical environment of the depolarizing qubit


def test_iteration_cap_gives_inconclusive_exit(tmp_path, capsys):
    stem = str(tmp_path / "ex2")
    main(["make", "example2", "-o", stem])
    capsys.readouterr()
    code, doc = run(
        capsys,
        "check",
        "div",
        f"{stem}.psi.json",
        f"{stem}.phi.json",
        "--max-iter",
        "50",
        "--quiet",
    )
    assert code == 2
    assert doc["status"] == "inconclusive"


def test_module_entry_point(tmp_path):
    id_path = str(tmp_path / "id2.json")
    subprocess.run(
        [sys.executable, "-m", "chancompat", "make", "identity", "-o", id_path],
        check=True,
    )
    proc = subprocess.run(
        [sys.executable, "-m", "chancompat", "--quiet", "check", "div", id_path, id_path],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "feasible"
