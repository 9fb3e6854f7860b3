"""Command-line behavior: output shapes, exit codes, determinism."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

from archmatch.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

runner = CliRunner()


@pytest.fixture()
def workdir(tmp_path):
    for name in ("types.adl", "document_manager.adl", "insurance.adl",
                 "manage_documents_req.adl", "manage_documents_view_req.adl",
                 "manage_portfolio_req.adl", "catalog.txt", "catalog_full.txt"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    return tmp_path


def run(*args, **kwargs):
    return runner.invoke(main, list(args), catch_exceptions=False, **kwargs)


# --- check -----------------------------------------------------------------------

def test_check_valid_unit(workdir):
    res = run("check", str(workdir / "manage_documents_req.adl"))
    assert res.exit_code == 0


def test_check_empty_unit(tmp_path):
    empty = tmp_path / "empty.adl"
    empty.write_text("")
    res = run("check", str(empty))
    assert res.exit_code == 0


def test_check_broken_unit(tmp_path):
    bad = tmp_path / "bad.adl"
    bad.write_text("interface X {")
    res = run("check", str(bad))
    assert res.exit_code == 2
    assert "1:1" in res.stderr or "unclosed" in res.stderr


def test_check_multiple_units(workdir):
    res = run("check", str(workdir / "types.adl"), str(workdir / "document_manager.adl"))
    assert res.exit_code == 0


# --- arch ------------------------------------------------------------------------

def test_arch_lists_objects_and_morphisms(workdir):
    res = run("--catalog", str(workdir / "catalog_full.txt"), "arch", "CustomerService")
    assert res.exit_code == 0
    assert "object AccountInquiry" in res.output
    assert "morphism AccountInquiry -cmp-> CustomerInquiry" in res.output
    assert "3 declared" in res.output
    assert "(derived)" not in res.output


def test_arch_closure_marks_derived(tmp_path):
    (tmp_path / "chain.adl").write_text(
        "interface I1 { }\ninterface I2 { }\ninterface I3 { }\n"
        "architecture business BA {\n"
        "  object I1;\n  object I2;\n  object I3;\n"
        "  morphism I1 -ext-> I2;\n  morphism I2 -ext-> I3;\n}\n")
    (tmp_path / "cat.txt").write_text("chain.adl\n")
    res = run("--catalog", str(tmp_path / "cat.txt"), "arch", "--closure")
    assert res.exit_code == 0
    assert "morphism I1 -ext-> I3 (derived)" in res.output
    assert "2 declared, 1 derived" in res.output


def test_arch_single_object_closure(tmp_path):
    (tmp_path / "solo.adl").write_text(
        "interface I1 { }\narchitecture business BA { object I1; }\n")
    (tmp_path / "cat.txt").write_text("solo.adl\n")
    res = run("--catalog", str(tmp_path / "cat.txt"), "arch", "--closure")
    assert res.exit_code == 0
    assert "0 derived" in res.output


def test_arch_check_warns_on_mixed_composition(tmp_path):
    (tmp_path / "mix.adl").write_text(
        "interface I1 { }\ninterface I2 { }\ninterface I3 { }\n"
        "architecture business BA {\n"
        "  object I1;\n  object I2;\n  object I3;\n"
        "  morphism I1 -ext-> I2;\n  morphism I2 -cmp-> I3;\n}\n")
    (tmp_path / "cat.txt").write_text("mix.adl\n")
    res = run("--catalog", str(tmp_path / "cat.txt"), "arch", "--check")
    assert res.exit_code == 0
    assert "composition undefined" in res.output


def test_arch_unknown_name(workdir):
    res = run("--catalog", str(workdir / "catalog_full.txt"), "arch", "Nope")
    assert res.exit_code == 2


# --- protocol ---------------------------------------------------------------------

def test_protocol_expression_dfa():
    res = run("protocol", "?a", "--emit-dfa")
    assert res.exit_code == 0
    assert res.output == "start: 0\naccept: 1\n0 a 1\n"


def test_protocol_sample_contract(workdir):
    res = run("--catalog", str(workdir / "catalog.txt"),
              "protocol", "ManageDocumentCtr", "--sample", "2")
    assert res.exit_code == 0
    assert "searchDocuments setPreference" in res.output.splitlines()


def test_protocol_component_and_publication(workdir):
    res = run("--catalog", str(workdir / "catalog_full.txt"),
              "protocol", "AccountServicePub", "--sample", "1")
    assert res.exit_code == 0
    assert "getBalance" in res.output
    res = run("--catalog", str(workdir / "catalog_full.txt"),
              "protocol", "DocumentManager", "--emit-dfa")
    assert res.exit_code == 0
    assert res.output.startswith("start: 0")


def test_protocol_unknown_name(workdir):
    res = run("--catalog", str(workdir / "catalog.txt"), "protocol", "Ghost")
    assert res.exit_code == 2


# --- match ------------------------------------------------------------------------

def test_match_use_exit_zero(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
              "match", str(workdir / "manage_documents_req.adl"))
    assert res.exit_code == 0
    assert res.output.splitlines()[0] == "USE DocumentManager"


def test_match_new_exit_one(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
              "match", str(workdir / "manage_portfolio_req.adl"))
    assert res.exit_code == 1
    assert res.output.splitlines()[0] == "NEW"


def test_match_adapt(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
              "match", str(workdir / "manage_documents_view_req.adl"))
    assert res.exit_code == 0
    assert res.output.splitlines()[0] == "ADAPT DocumentManager"
    assert "viewDocument" in res.output


def test_match_malformed_requirement(workdir, tmp_path):
    bad = tmp_path / "bad.adl"
    bad.write_text("interface {")
    res = run("--quiet", "--catalog", str(workdir / "catalog.txt"), "match", str(bad))
    assert res.exit_code == 2


def test_match_json_shape(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
              "match", str(workdir / "manage_documents_req.adl"), "--format", "json")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["version"] == 1
    assert doc["recommendation"] == {"action": "USE", "component": "DocumentManager"}
    report = doc["reports"][0]
    assert report["component"] == "DocumentManager"
    assert report["verdict"] == "USE"
    assert report["kind"] == "exact"
    assert report["score"] == 1.0
    assert report["methodMap"]["searchDocuments"] == "searchDocuments"
    assert report["counterexample"] is None


def test_match_json_counterexample(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
              "match", str(workdir / "manage_documents_view_req.adl"), "--format", "json")
    doc = json.loads(res.output)
    assert doc["reports"][0]["counterexample"] == ["viewDocument"]


def test_match_no_prefilter_same_recommendation(workdir):
    a = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
            "match", str(workdir / "manage_documents_req.adl"))
    b = run("--quiet", "--catalog", str(workdir / "catalog.txt"),
            "match", str(workdir / "manage_documents_req.adl"), "--no-prefilter")
    assert a.output.splitlines()[0] == b.output.splitlines()[0]


def test_match_cold_and_warm_cache_identical(workdir):
    args = ["--quiet", "--catalog", str(workdir / "catalog.txt"),
            "match", str(workdir / "manage_documents_req.adl")]
    cold = run(*args)
    assert (workdir / "catalog.txt.idx").is_file()
    warm = run(*args)
    assert cold.output == warm.output
    assert cold.exit_code == warm.exit_code


# --- link -------------------------------------------------------------------------

def test_link_pass(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog_full.txt"),
              "link", "Realization")
    assert res.exit_code == 0
    assert res.output.strip() == "link Realization: PASS"


def test_link_broken(tmp_path):
    (tmp_path / "broken.adl").write_text(
        "interface I1 { }\ninterface I2 { }\n"
        "contract C1 implements I1 { }\ncontract C2 implements I2 { }\n"
        "component K1 { provided contract C1 }\n"
        "component K2 { provided contract C2 }\n"
        "architecture business BA {\n"
        "  object I1;\n  object I2;\n  morphism I1 -ext-> I2;\n}\n"
        "architecture application AA {\n"
        "  object K1;\n  object K2;\n}\n"
        "link L from BA to AA {\n"
        "  map I1 -> K1;\n  map I2 -> K2;\n"
        "  generator ext -> use;\n  generator cmp -> cmp;\n}\n")
    (tmp_path / "cat.txt").write_text("broken.adl\n")
    res = run("--quiet", "--catalog", str(tmp_path / "cat.txt"), "link", "L")
    assert res.exit_code == 1
    assert "FAIL" in res.output
    assert "K1 -use-> K2" in res.output


def test_link_unknown(workdir):
    res = run("--quiet", "--catalog", str(workdir / "catalog_full.txt"), "link", "Nope")
    assert res.exit_code == 2


# --- index ------------------------------------------------------------------------

def test_index_build_and_inspect(workdir):
    res = run("--catalog", str(workdir / "catalog_full.txt"), "index", "build")
    assert res.exit_code == 0
    assert "indexed 5 component(s)" in res.output
    res = run("--catalog", str(workdir / "catalog_full.txt"), "index", "inspect")
    assert res.exit_code == 0
    assert "components: 5" in res.output
    assert "freshness: fresh" in res.output
    assert "DocumentManager" in res.output


def test_index_inspect_corrupt(workdir):
    cache = workdir / "catalog.txt.idx"
    cache.write_text("garbage\n")
    res = run("--catalog", str(workdir / "catalog.txt"), "index", "inspect")
    assert res.exit_code == 2


def test_state_limit_env_rejected_when_invalid(workdir):
    res = run("protocol", "?a", env={"ARCHMATCH_STATE_LIMIT": "banana"})
    assert res.exit_code == 2


def test_state_limit_env_applies(workdir):
    res = run("--quiet", "protocol", "(?a + ?b)* | (?c + ?d)*",
              env={"ARCHMATCH_STATE_LIMIT": "2"})
    assert res.exit_code == 2
    assert "protocol too large" in res.stderr


# --- determinism -------------------------------------------------------------------

def test_commands_are_byte_deterministic(workdir):
    cases = [
        ("--quiet", "--catalog", str(workdir / "catalog_full.txt"), "arch", "--closure"),
        ("--quiet", "--catalog", str(workdir / "catalog_full.txt"), "protocol",
         "DocumentManager", "--emit-dfa"),
        ("--quiet", "--catalog", str(workdir / "catalog_full.txt"), "match",
         str(workdir / "manage_documents_req.adl"), "--format", "json"),
        ("--quiet", "--catalog", str(workdir / "catalog_full.txt"), "link", "Realization"),
    ]
    for args in cases:
        first = run(*args)
        second = run(*args)
        assert first.output == second.output
        assert first.exit_code == second.exit_code
