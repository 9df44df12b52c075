"""Compilation to detector error models, checked against dense simulation."""

import numpy as np
import pytest

from qecbound.compiler import (
    CompileError,
    DemParseError,
    SymbolicProb,
    check_well_defined,
    compile_to_dem,
    decompose_channels,
    parse_dem,
    write_dem,
    write_symbolic_dem,
)
from qecbound.errorspace import observable_of, syndrome_of
from qecbound.frontend import parse_program, parse_symbolic_program

from conftest import dense_channels, dense_parity, dense_run, random_program_text


def test_repetition_code_compiles_to_expected_footprints(repetition_program_text):
    model = compile_to_dem(parse_program(repetition_program_text))
    assert model.n_channels == 3
    assert model.n_detectors == 2
    assert model.n_observables == 1
    assert model.probabilities == (0.01, 0.01, 0.01)
    # channel 0: D0 L0; channel 1: D0 D1; channel 2: D1
    assert model.det_footprints == (0b01, 0b11, 0b10)
    assert model.obs_footprints == (1, 0, 0)


def test_repetition_code_distribution_table(repetition_program_text):
    """All 8 (error, syndrome, observable) rows at v = 0.01."""
    model = compile_to_dem(parse_program(repetition_program_text))
    # string "abc" means channel0=a, channel1=b, channel2=c; same for
    # syndromes with detector 0 first
    table = {
        "000": ("00", 0), "111": ("00", 1),
        "001": ("01", 0), "110": ("01", 1),
        "011": ("10", 0), "100": ("10", 1),
        "010": ("11", 0), "101": ("11", 1),
    }
    for estr, (sstr, obs) in table.items():
        e = sum(1 << i for i, c in enumerate(estr) if c == "1")
        s = sum(1 << i for i, c in enumerate(sstr) if c == "1")
        assert syndrome_of(model, e) == s, estr
        assert observable_of(model, e) == obs, estr


def test_well_defined_report(repetition_program_text):
    report = check_well_defined(parse_program(repetition_program_text))
    assert report.well_defined
    assert all(r.value == 0 for r in report.declarations)


def test_unmeasured_superposition_not_well_defined():
    prog = parse_program("R 0\nH 0\nM a <- 0\nOBSERVABLE a\n")
    report = check_well_defined(prog)
    assert not report.well_defined
    assert len(report.offending) == 1


def test_parity_of_correlated_random_outcomes_is_well_defined():
    # Bell pair: each outcome random, XOR deterministic
    prog = parse_program(
        "R 0\nR 1\nH 0\nCX 0 1\nM a <- 0\nM b <- 1\nDETECTOR a b\nOBSERVABLE a b\n"
    )
    report = check_well_defined(prog)
    assert report.well_defined
    assert all(r.value == 0 for r in report.declarations)


def test_compile_rejects_ill_defined_program():
    with pytest.raises(CompileError):
        compile_to_dem(parse_program("R 0\nH 0\nM a <- 0\nOBSERVABLE a\n"))


def test_depolarize_decomposition_order_and_scales():
    prog = parse_program(
        "R 0\nR 1\nDEPOLARIZE1(0.3) 0\nDEPOLARIZE2(0.15) 0 1\n"
        "M a <- 0\nOBSERVABLE a\n"
    )
    chans = decompose_channels(prog)
    assert len(chans) == 18
    assert all(abs(c.probability - 0.1) < 1e-15 for c in chans[:3])
    assert [c.pauli.paulis for c in chans[:3]] == [((0, "X"),), ((0, "Y"),), ((0, "Z"),)]
    assert all(abs(c.probability - 0.01) < 1e-15 for c in chans[3:])
    # lexicographic pair order starts IX, IY, IZ, XI, XX, ...
    assert chans[3].pauli.paulis == ((1, "X"),)
    assert chans[6].pauli.paulis == ((0, "X"),)
    assert chans[7].pauli.paulis == ((0, "X"), (1, "X"))


def test_zero_probability_channels_dropped():
    prog = parse_program("R 0\nXERR(0) 0\nXERR(0.1) 0\nM a <- 0\nOBSERVABLE a\n")
    model = compile_to_dem(prog)
    assert model.n_channels == 1
    assert model.probabilities == (0.1,)


def test_probability_one_rejected():
    prog = parse_program("R 0\nXERR(1) 0\nM a <- 0\nOBSERVABLE a\n")
    with pytest.raises(CompileError):
        compile_to_dem(prog)


def test_symbolic_compile():
    prog = parse_symbolic_program(
        "R 0\nXERR(x0) 0\nDEPOLARIZE1(x1) 0\nM a <- 0\nOBSERVABLE a\n"
    )
    model = compile_to_dem(prog)
    assert model.is_symbolic
    assert model.probabilities[0] == SymbolicProb("x0")
    assert model.probabilities[1] == SymbolicProb("x1", 1 / 3)
    with pytest.raises(CompileError):
        model.concrete_probabilities()


def test_dem_round_trip(repetition_program_text):
    model = compile_to_dem(parse_program(repetition_program_text))
    assert parse_dem(write_dem(model)) == model


def test_symbolic_dem_round_trip():
    prog = parse_symbolic_program("R 0\nDEPOLARIZE1(x0) 0\nM a <- 0\nOBSERVABLE a\n")
    model = compile_to_dem(prog)
    assert parse_dem(write_symbolic_dem(model)) == model


def test_dem_parse_errors():
    with pytest.raises(DemParseError):
        parse_dem("error(0.1) D0 D0\n")
    with pytest.raises(DemParseError):
        parse_dem("error(1.5) D0\n")
    with pytest.raises(DemParseError):
        parse_dem("garbage\n")
    with pytest.raises(DemParseError):
        parse_dem("dem 1 1\nerror(0.1) D3\n")


def test_dem_without_header_infers_dimensions():
    model = parse_dem("error(0.1) D0 D2 L0\nerror(0.2) D1\n")
    assert model.n_detectors == 3
    assert model.n_observables == 1


@pytest.mark.parametrize("seed", range(25))
def test_compiled_maps_match_dense_simulation(seed):
    """Restricted random programs are always well-defined; every error
    bitstring's (syndrome, observable) must match the dense oracle."""
    rng = np.random.default_rng(seed)
    prog = parse_program(random_program_text(rng, restricted=True))
    report = check_well_defined(prog)
    assert report.well_defined
    model = compile_to_dem(prog)
    chans = dense_channels(prog)
    # compile drops p=0 channels; restricted generator never emits them
    assert len(chans) == model.n_channels
    noiseless = dense_run(prog, 0, np.random.default_rng(1))
    syndromes = [d for d in prog.declarations if d.kind == "syndrome"]
    observables = [d for d in prog.declarations if d.kind == "observable"]
    for e in range(1 << model.n_channels):
        out = dense_run(prog, e, np.random.default_rng(2))
        s = sum(
            1 << j
            for j, d in enumerate(syndromes)
            if dense_parity(prog, d, out) != dense_parity(prog, d, noiseless)
        )
        o = sum(
            1 << j
            for j, d in enumerate(observables)
            if dense_parity(prog, d, out) != dense_parity(prog, d, noiseless)
        )
        assert syndrome_of(model, e) == s
        assert observable_of(model, e) == o


@pytest.mark.parametrize("seed", range(15))
def test_well_definedness_matches_dense_randomization(seed):
    """General random programs: the static verdict per declaration matches
    whether the dense noiseless parity is constant over repeated trials."""
    rng = np.random.default_rng(seed + 10_000)
    prog = parse_program(random_program_text(rng, restricted=False))
    report = check_well_defined(prog)
    for r in report.declarations:
        parities = {
            dense_parity(prog, r.declaration, dense_run(prog, 0, np.random.default_rng(t)))
            for t in range(60)
        }
        if r.deterministic:
            assert parities == {r.value}
        else:
            assert parities == {0, 1}
