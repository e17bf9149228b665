"""Circuit language: parsing, diagnostics, formatting, compiled pipelines."""

import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from aomsim import CompileError, Convention, compile_circuit, format_circuit, parse
from aomsim.dsl import (
    AomStmt,
    CheckStmt,
    CircuitAst,
    FilterStmt,
    HeraldStmt,
    ParseError,
    ReportEntropyStmt,
    ReportGhzStmt,
    SourceStmt,
)
from aomsim.states import ModeLabel

M = ModeLabel
CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"

SWAP_TEXT = (CIRCUITS / "swap.qc").read_text()
GHZ_TEXT = (CIRCUITS / "ghz.qc").read_text()


def parse_ok(text: str) -> CircuitAst:
    result = parse(text)
    assert not isinstance(result, list), f"unexpected parse errors: {result}"
    return result


def parse_bad(text: str) -> list[ParseError]:
    result = parse(text)
    assert isinstance(result, list) and result, "expected parse errors"
    return result


# ---------------------------------------------------------------- parsing


def test_swap_circuit_parses_to_expected_statements():
    ast = parse_ok(SWAP_TEXT)
    assert len(ast.statements) == 6
    s1, s2, a1, a2, herald, report = ast.statements
    assert s1 == SourceStmt("S1", (M("1", 0), M("2", 1)), (M("1'", 1), M("2'", 0)),
                            math.pi / 4)
    assert s2 == SourceStmt("S2", (M("3", 0), M("4", 1)), (M("3'", 1), M("4'", 0)),
                            math.pi / 4)
    assert a1 == AomStmt("A1", (M("2", 1), M("3", 0)), ("T1", "T1'"))
    assert a2 == AomStmt("A2", (M("3'", 1), M("2'", 0)), ("T2'", "T2"))
    assert herald == HeraldStmt(((("T1", "T1'"), 1), (("T2", "T2'"), 1)))
    assert report == ReportEntropyStmt(("1", "1'"))
    assert [s.line for s in ast.statements] == [5, 6, 7, 8, 9, 10]


def test_ghz_circuit_parses():
    ast = parse_ok(GHZ_TEXT)
    assert len(ast.statements) == 8
    kinds = [type(s).__name__ for s in ast.statements]
    assert kinds == ["SourceStmt", "SourceStmt", "AomStmt", "FilterStmt",
                     "FilterStmt", "CheckStmt", "HeraldStmt", "ReportGhzStmt"]
    check = ast.statements[5]
    assert check == CheckStmt(1.0)
    filt = ast.statements[3]
    assert filt == FilterStmt("FT", "T", 0, 1.0)


def test_empty_and_comment_only_input():
    assert parse_ok("").statements == ()
    assert parse_ok("# just a comment\n\n   # another\n").statements == ()


def test_windows_line_endings():
    ast = parse_ok(SWAP_TEXT.replace("\n", "\r\n"))
    assert len(ast.statements) == 6


def test_aom_arity_error():
    errs = parse_bad("aom A1 in=(2@1)")
    assert errs[0].line == 1
    assert "expected two inputs" in errs[0].message


def test_unknown_statement():
    errs = parse_bad("polarizer P path=x")
    assert "unknown statement" in errs[0].message


def test_duplicate_path_declaration():
    errs = parse_bad(
        "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\n"
        "source S2 arms=(2@0,5@1) alt=(6@1,7@0)\n"
    )
    assert errs[0].line == 2
    assert "duplicate path declaration '2'" in errs[0].message


def test_malformed_number():
    errs = parse_bad("source S1 arms=(1@0,2@1) alt=(1'@1,2'@0) alpha=fast")
    assert "malformed number" in errs[0].message


def test_undeclared_path():
    errs = parse_bad("source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\naom A in=(9@1,3@0) out=(x,y)")
    assert errs[0].line == 2
    assert "undeclared path '9'" in errs[0].message


def test_multiple_heralds_rejected():
    errs = parse_bad(
        "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\n"
        "herald count(1)==1\n"
        "herald count(2)==1\n"
    )
    assert errs[0].line == 3
    assert "multiple herald" in errs[0].message


def test_report_requires_preceding_herald():
    errs = parse_bad("source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\nreport entropy split=(1)")
    assert "must follow the herald" in errs[0].message


def test_bad_convention_value():
    errs = parse_bad(
        "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\n"
        "aom A in=(2@1,1@0) out=(x,y) convention=sideways\n"
    )
    assert "convention" in errs[0].message


def test_unknown_argument_rejected():
    errs = parse_bad("source S1 arms=(1@0,2@1) alt=(1'@1,2'@0) angle=0.5")
    assert "unknown argument 'angle'" in errs[0].message


def test_unknown_report_kind():
    errs = parse_bad(
        "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\n"
        "herald count(1)==1\n"
        "report purity split=(1)\n"
    )
    assert "unknown report kind 'purity'" in errs[0].message


def test_trailing_and_rejected():
    errs = parse_bad("source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\nherald count(1)==1 and")
    assert "trailing 'and'" in errs[0].message


def test_parser_collects_errors_across_lines():
    errs = parse_bad("bogus one\nsource S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\nbogus two\n")
    assert [e.line for e in errs] == [1, 3]


def test_error_positions_point_inside_offending_token():
    text = "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0) alpha=oops"
    err = parse_bad(text)[0]
    token_start = text.index("oops") + 1
    assert err.line == 1
    assert token_start <= err.column <= token_start + len("oops")
    # arity error points inside the in=(...) token value
    text2 = "aom A1 in=(2@1)"
    err2 = parse_bad(text2)[0]
    start = text2.index("(2@1)") + 1
    assert start <= err2.column < start + len("(2@1)")


@given(st.text(max_size=200))
@settings(max_examples=200, deadline=None)
def test_parse_is_total(text):
    result = parse(text)
    assert isinstance(result, (CircuitAst, list))


# ---------------------------------------------------------------- formatting


@pytest.mark.parametrize("text", [SWAP_TEXT, GHZ_TEXT])
def test_format_round_trip(text):
    ast = parse_ok(text)
    rendered = format_circuit(ast)
    assert parse_ok(rendered) == ast


def test_format_round_trip_preserves_nondefault_arguments():
    text = (
        "source S arms=(1@0,2@2) alt=(1'@2,2'@0) alpha=0.3\n"
        "aom A in=(2@2,1@0) out=(x,y) shift=2 t=0.25 convention=paper\n"
        "filter F path=x pass=2 sigma=0.125\n"
        "check bandwidth pump=0.5\n"
        "herald count(x)==1 and count(y)==0\n"
        "report outcomes paths=(x,y)\n"
    )
    ast = parse_ok(text)
    assert parse_ok(format_circuit(ast)) == ast


# ---------------------------------------------------------------- compiling


def test_compile_rejects_bins_incompatible_with_shift():
    ast = parse_ok(
        "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\n"
        "source S2 arms=(3@1,4@0) alt=(3'@0,4'@1)\n"
        "aom A in=(2@1,3@1) out=(x,y)\n"
    )
    with pytest.raises(CompileError) as exc:
        compile_circuit(ast)
    assert "incompatible with shift" in str(exc.value)
    assert exc.value.line == 3


def test_compile_rejects_undeclared_herald_path_in_programmatic_ast():
    ast = CircuitAst((
        SourceStmt("S", (M("1", 0), M("2", 1)), (M("1'", 1), M("2'", 0)), math.pi / 4),
        HeraldStmt(((("ghost",), 1),)),
    ))
    with pytest.raises(CompileError) as exc:
        compile_circuit(ast)
    assert "undeclared path 'ghost'" in str(exc.value)


def test_compile_rejects_output_path_reuse_in_programmatic_ast():
    ast = CircuitAst((
        SourceStmt("S", (M("1", 0), M("2", 1)), (M("1'", 1), M("2'", 0)), math.pi / 4),
        AomStmt("A", (M("2", 1), M("1", 0)), ("x", "y")),
        AomStmt("B", (M("1'", 1), M("2'", 0)), ("x", "z")),
    ))
    with pytest.raises(CompileError) as exc:
        compile_circuit(ast)
    assert "already declared" in str(exc.value)


def test_compiled_swap_matches_programmatic_run_exactly():
    from aomsim import run_swap

    pipeline = compile_circuit(parse_ok(SWAP_TEXT))
    result = pipeline.run()
    reference = run_swap()
    assert result.success_probability == reference.success_probability
    assert len(result.outcomes) == len(reference.outcomes)
    for got, want in zip(result.outcomes, reference.outcomes):
        assert got.label == want.label
        assert got.probability == want.probability
        if want.conditional_state is None:
            assert got.conditional_state is None
            continue
        keys = set(got.conditional_state.terms) | set(want.conditional_state.terms)
        for k in keys:
            assert abs(got.conditional_state.amplitude(k)
                       - want.conditional_state.amplitude(k)) <= 1e-15


def test_compiled_ghz_matches_programmatic_run_exactly():
    from aomsim import run_ghz

    pipeline = compile_circuit(parse_ok(GHZ_TEXT))
    result = pipeline.run()
    reference = run_ghz()
    assert result.success_probability == reference.success_probability
    assert result.bandwidth_valid is True
    for got, want in zip(result.outcomes, reference.outcomes):
        assert got.label == want.label
        assert got.probability == want.probability
        if got.accepted:
            assert got.metrics["ghz_fidelity"] == pytest.approx(
                want.metrics["ghz_fidelity"], abs=1e-15)


def test_convention_override_changes_phases_not_magnitudes():
    pipeline = compile_circuit(parse_ok(SWAP_TEXT))
    unitary = pipeline.run(convention_override=Convention.UNITARY)
    literal = pipeline.run(convention_override=Convention.PAPER_LITERAL)
    assert literal.non_unitary and not unitary.non_unitary
    for got, want in zip(unitary.outcomes, literal.outcomes):
        assert got.probability == pytest.approx(want.probability, abs=1e-9)


def test_heralding_a_dark_path_accepts_nothing():
    # alpha=0 keeps the second source in its arm pair, so its alt paths stay
    # dark; heralding on one of them compiles and yields zero acceptance
    text = (
        "source S1 arms=(1@0,2@1) alt=(1'@1,2'@0)\n"
        "source S2 arms=(3@0,4@1) alt=(3'@1,4'@0) alpha=0.0\n"
        "herald count(3')==1\n"
    )
    result = compile_circuit(parse_ok(text)).run()
    assert result.success_probability == 0.0
    assert [o for o in result.outcomes if o.accepted] == []


def test_pipeline_without_sources_raises_at_run():
    from aomsim import ZeroStateError

    pipeline = compile_circuit(parse_ok("# nothing\n"))
    with pytest.raises(ZeroStateError):
        pipeline.run()


def test_report_outcomes_distribution():
    text = GHZ_TEXT + "report outcomes paths=(T,T')\n"
    result = compile_circuit(parse_ok(text)).run()
    dist = result.count_distributions["T,T'"]
    assert dist[1] == pytest.approx(0.5, abs=1e-12)
    assert dist[0] == pytest.approx(0.25, abs=1e-12)
    assert dist[2] == pytest.approx(0.25, abs=1e-12)
