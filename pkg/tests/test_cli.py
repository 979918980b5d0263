"""Subcommand behaviours, file grammars and exit codes."""

import json

import pytest

from sodatlas import cli, selftest
from sodatlas.catalog.scripts import catalog_ids
from sodatlas.errors import VerificationError

HEX_GEN = "[[2,1,1,1],[-1,-1,0,-1],[-1,-1,-1,0],[-1,0,-1,-1]]"
SWAP12 = "[[1,0,0,0],[0,0,1,0],[0,1,0,0],[0,0,0,1]]"


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- classes -------------------------------------------------------------------

def test_classes_degree_five_lists_ten(capsys):
    code, out, _ = run(capsys, "classes", "--degree", "5", "--r", "-1")
    assert code == 0
    assert "surface: P2[4]" in out
    assert "count: 10" in out
    assert out.count("\n") == 13  # header x2, ten classes, count

def test_classes_plane_has_one_line_class(capsys):
    code, out, _ = run(capsys, "classes", "--degree", "9", "--r", "1")
    assert code == 0
    assert "H\n" in out and "count: 1" in out

def test_classes_rejects_degree_out_of_range(capsys):
    code, _, err = run(capsys, "classes", "--degree", "12", "--r", "0")
    assert code == 2 and "degree" in err

def test_classes_rejects_unsupported_square_range(capsys):
    code, _, err = run(capsys, "classes", "--degree", "2", "--r", "0")
    assert code == 2 and "error:" in err

def test_unknown_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["classes", "--bogus", "1"])
    assert exc.value.code == 2
    capsys.readouterr()


# -- sod -----------------------------------------------------------------------

def test_sod_point_collection(tmp_path, capsys):
    f = tmp_path / "surface.cfg"
    f.write_text("[surface]\nmodel = P2[3]\nover = Point\n")
    code, out, _ = run(capsys, "sod", "--surface", str(f))
    assert code == 0
    assert "block 1: O(-H), O(-2H + E1 + E2 + E3)" in out
    assert "block 3: O" in out
    assert "gram:" in out

def test_sod_accepts_base_and_blowups_keys(tmp_path, capsys):
    f = tmp_path / "surface.cfg"
    f.write_text("[surface]\nbase = F0\nblowups = []\nover = RationalCurve\nfibre = h\n")
    code, out, _ = run(capsys, "sod", "--surface", str(f))
    assert code == 0
    assert "over: RationalCurve" in out

def test_sod_missing_file_exits_two(capsys):
    code, _, err = run(capsys, "sod", "--surface", "/nonexistent/surface.cfg")
    assert code == 2 and "cannot read" in err

def test_sod_rejects_two_sections(tmp_path, capsys):
    f = tmp_path / "surface.cfg"
    f.write_text("[surface]\nmodel = P2\n\n[surface]\nmodel = F0\n")
    code, _, err = run(capsys, "sod", "--surface", str(f))
    assert code == 2 and "exactly one" in err


# -- mutate ----------------------------------------------------------------------

def _beilinson_files(tmp_path):
    coll = tmp_path / "collection.cfg"
    coll.write_text("[collection]\nmodel = P2\nblocks = O(-2H) | O(-H) | O\n")
    return coll

def test_mutate_round_trip(tmp_path, capsys):
    coll = _beilinson_files(tmp_path)
    script = tmp_path / "script.txt"
    script.write_text("helix +K\nhelix -K\n")
    code, out, _ = run(capsys, "mutate", "--collection", str(coll), "--script", str(script))
    assert code == 0
    assert out.count("step") == 2
    start = [l for l in out.splitlines() if l.startswith("start:")][0]
    final = [l for l in out.splitlines() if l.startswith("final:")][0]
    assert start.split(":", 1)[1] == final.split(":", 1)[1]

def test_mutate_reports_failing_step(tmp_path, capsys):
    coll = _beilinson_files(tmp_path)
    script = tmp_path / "script.txt"
    script.write_text("L 1\n")
    code, _, err = run(capsys, "mutate", "--collection", str(coll), "--script", str(script))
    assert code == 1
    assert "step 1" in err and "L 1" in err

def test_mutate_rejects_bad_move_text(tmp_path, capsys):
    coll = _beilinson_files(tmp_path)
    script = tmp_path / "script.txt"
    script.write_text("wiggle 3\n")
    code, _, err = run(capsys, "mutate", "--collection", str(coll), "--script", str(script))
    assert code == 2


# -- verify-link -----------------------------------------------------------------

def test_verify_link_single_id(capsys):
    code, out, _ = run(capsys, "verify-link", "--id", "I-9-8")
    assert code == 0
    lines = out.strip().splitlines()
    records = [json.loads(l) for l in lines]
    assert all(r["case"] == "I-9-8" for r in records)
    assert "verdict" in records[-1]
    assert all(r["ok"] for r in records[:-1])

def test_verify_link_unknown_id(capsys):
    code, _, err = run(capsys, "verify-link", "--id", "NO-SUCH")
    assert code == 2 and "unknown catalog id" in err

def test_verify_link_all_cases_in_order(capsys):
    code, out, _ = run(capsys, "verify-link", "--all")
    assert code == 0
    lines = out.strip().splitlines()
    verdicts = [json.loads(l) for l in lines if "verdict" in json.loads(l)]
    assert [v["case"] for v in verdicts] == list(catalog_ids())

def test_verify_link_output_is_deterministic(capsys):
    _, first, _ = run(capsys, "verify-link", "--id", "II-2-1-2")
    _, second, _ = run(capsys, "verify-link", "--id", "II-2-1-2")
    assert first == second

def test_verify_link_needs_exactly_one_selector(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify-link"])
    assert exc.value.code == 2
    capsys.readouterr()


# -- group -----------------------------------------------------------------------

def _hexagon_file(tmp_path):
    f = tmp_path / "action.cfg"
    f.write_text(f"[group]\nmodel = P2[3]\ngen = {HEX_GEN}\ngen = {SWAP12}\n")
    return f

def test_group_reports_hexagon_data(tmp_path, capsys):
    code, out, _ = run(capsys, "group", "--action", str(_hexagon_file(tmp_path)))
    assert code == 0
    assert "order: 12" in out
    assert "invariant rank: 1" in out
    assert "H1: 0" in out
    assert "minimality (numerical proxy): minimal" in out
    orbit_lines = [l for l in out.splitlines() if l.startswith("orbit:")]
    assert len(orbit_lines) == 1  # all six contractible classes in one orbit

def test_group_sign_problem_reports_witness(tmp_path, capsys):
    f = tmp_path / "action.cfg"
    f.write_text("[group]\nmodel = P2[2]\ngen = [[1,0,0],[0,0,1],[0,1,0]]\n")
    code, out, _ = run(capsys, "group", "--action", str(f))
    assert code == 0
    witness_lines = [l for l in out.splitlines() if "not minimal, witness:" in l]
    assert len(witness_lines) == 1
    assert "E1" in witness_lines[0] and "E2" in witness_lines[0]

def test_group_rejects_wrong_shape(tmp_path, capsys):
    f = tmp_path / "action.cfg"
    f.write_text("[group]\nmodel = P2[3]\ngen = [[1,0],[0,1]]\n")
    code, _, err = run(capsys, "group", "--action", str(f))
    assert code == 2 and "4x4" in err

def test_group_rejects_non_isometry(tmp_path, capsys):
    f = tmp_path / "action.cfg"
    f.write_text("[group]\nmodel = P2\ngen = [[2]]\n")
    code, _, err = run(capsys, "group", "--action", str(f))
    assert code == 2 and "intersection form" in err


# -- atoms -----------------------------------------------------------------------

def _atom_files(tmp_path):
    surface = tmp_path / "surface.cfg"
    surface.write_text("[surface]\nmodel = P2[2]\n")
    action = tmp_path / "action.cfg"
    action.write_text("[group]\ngen = [[1,0,0],[0,0,1],[0,1,0]]\n")
    contraction = tmp_path / "contraction.cfg"
    contraction.write_text("[contraction]\norbits = [0]\nterminal = Point\nmodel = P2\n")
    return surface, action, contraction

def test_atoms_for_a_blown_orbit(tmp_path, capsys):
    surface, action, contraction = _atom_files(tmp_path)
    code, out, _ = run(
        capsys, "atoms",
        "--surface", str(surface), "--action", str(action), "--contraction", str(contraction),
    )
    assert code == 0
    assert out.count("atom: permutation, orbit size 1") == 3
    assert "atom: permutation, orbit size 2" in out
    assert "count: 4" in out

def test_atoms_with_k_nef_terminal(tmp_path, capsys):
    surface, action, contraction = _atom_files(tmp_path)
    contraction.write_text("[contraction]\nterminal = K-nef\n")
    code, out, _ = run(
        capsys, "atoms",
        "--surface", str(surface), "--action", str(action), "--contraction", str(contraction),
    )
    assert code == 0
    assert "atom: opaque K-nef, degree 7" in out
    assert "count: 1" in out

def test_atoms_rejects_mismatched_models(tmp_path, capsys):
    surface, action, contraction = _atom_files(tmp_path)
    action.write_text("[group]\nmodel = P2[3]\ngen = [[1,0,0],[0,0,1],[0,1,0]]\n")
    code, _, err = run(
        capsys, "atoms",
        "--surface", str(surface), "--action", str(action), "--contraction", str(contraction),
    )
    assert code == 2 and "does not match" in err

def test_atoms_rejects_wrong_residual_model(tmp_path, capsys):
    surface, action, contraction = _atom_files(tmp_path)
    contraction.write_text("[contraction]\norbits = [0]\nterminal = Point\nmodel = F0\n")
    code, _, err = run(
        capsys, "atoms",
        "--surface", str(surface), "--action", str(action), "--contraction", str(contraction),
    )
    assert code == 2 and "leaves" in err


# -- invariant -------------------------------------------------------------------

def test_invariant_round_trip_is_zero(tmp_path, capsys):
    f = tmp_path / "steps.cfg"
    f.write_text("[steps]\nblowup = 3\nblowdown = 3\n")
    code, out, _ = run(capsys, "invariant", "--steps", str(f))
    assert code == 0 and out == "0\n"

def test_invariant_single_blow_up(tmp_path, capsys):
    f = tmp_path / "steps.cfg"
    f.write_text("[steps]\nblowup = 2\n")
    code, out, _ = run(capsys, "invariant", "--steps", str(f))
    assert code == 0 and out == "-1*[orbit 2]\n"

def test_invariant_rejects_nonpositive_size(tmp_path, capsys):
    f = tmp_path / "steps.cfg"
    f.write_text("[steps]\nblowup = 0\n")
    code, _, err = run(capsys, "invariant", "--steps", str(f))
    assert code == 2 and "positive" in err


# -- profile ---------------------------------------------------------------------

def test_profile_on_the_bundled_data(capsys):
    from importlib import resources

    path = resources.files("sodatlas.catalog") / "data" / "profiles.cfg"
    code, out, _ = run(capsys, "profile", "--file", str(path))
    assert code == 0
    assert out.count("index formula: ok") == 3
    assert out.count("rich: yes") == 3
    assert out.count("rational shape: no") == 3

def test_profile_flags_a_failing_formula(tmp_path, capsys):
    f = tmp_path / "bad.cfg"
    f.write_text('[profile "broken"]\na = (1, 3, "a3")\nam = 2\nind = 2\n')
    code, out, _ = run(capsys, "profile", "--file", str(f))
    assert code == 1
    assert "index formula: FAIL" in out

def test_profile_without_orders_is_skipped(tmp_path, capsys):
    f = tmp_path / "partial.cfg"
    f.write_text('[atoms]\na = (1, 1, "0")\n')
    code, out, _ = run(capsys, "profile", "--file", str(f))
    assert code == 0
    assert "index formula: skipped" in out
    assert "rational shape: yes" in out

def test_profile_prints_degree_six_warnings(tmp_path, capsys):
    f = tmp_path / "dp6.cfg"
    f.write_text(
        '[profile "odd"]\n'
        'a = (1, 1, "0")\nb = (2, 3, "b")\nc = (3, 2, "c")\n'
        "am = 6\nind = 5\n"
    )
    code, out, _ = run(capsys, "profile", "--file", str(f))
    assert code == 1  # 5 * 6 != 1 * 3 * 2
    assert out.count("warning:") == 2


# -- selftest wiring ---------------------------------------------------------------

def test_selftest_subcommand_reports_stub_pass(monkeypatch, capsys):
    monkeypatch.setattr(selftest, "CRITERIA", ((1, "stub", lambda: "fine"),))
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert out == "PASS  1 stub: fine\n"

def test_selftest_subcommand_reports_stub_failure(monkeypatch, capsys):
    def boom():
        raise VerificationError("broken on purpose")

    monkeypatch.setattr(selftest, "CRITERIA", ((7, "stub", boom),))
    code, out, _ = run(capsys, "selftest")
    assert code == 1
    assert out == "FAIL  7 stub: broken on purpose\n"
