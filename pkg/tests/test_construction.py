import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdms import FqMatrix, SchemeParams
from pdms.construction import (BlockView, ConstructionError, ParameterError, build_scheme,
                               load_matrix, load_scheme, scheme_from_descriptor,
                               step2_zero_topleft, step3_blockdiag, validate_params)
from pdms.gf import Field
from pdms.linalg import mat_mul, rank
from pdms.superregular import cauchy, random_cauchy_spec

from conftest import REF_G, REF_ZEROED, REF_SOURCE, REF_PARAMS


def test_validate_params_examples():
    validate_params(REF_PARAMS)
    with pytest.raises(ParameterError) as info:
        validate_params(SchemeParams(11, 6, 5, 1, 3))
    assert len(info.value.problems) == 1 and "divide" in info.value.problems[0]
    with pytest.raises(ParameterError) as info:
        validate_params(SchemeParams(10, 6, 5, 1, 2))
    assert any("prime" in m for m in info.value.problems)


def test_validate_params_reports_every_problem():
    with pytest.raises(ParameterError) as info:
        validate_params(SchemeParams(10, 4, 5, 5, 0))
    assert len(info.value.problems) >= 3


def test_block_view_tiles_matrix():
    bv = BlockView(5, 6, 1, 2)
    seen = np.zeros((5, 6), dtype=int)
    for name in "ABCDEF":
        r, c = bv.region(name)
        seen[r, c] += 1
    assert (seen == 1).all()
    g = FqMatrix(REF_SOURCE, 11)
    assert bv.extract(g, "Bi", 0).tolist() == [[1, 6], [6, 4]]
    assert bv.extract(g, "Bi", 1).tolist() == [[2, 10], [7, 1]]
    assert bv.extract(g, "Ei", 1).tolist() == [[1, 9]]
    assert bv.extract(g, "D").tolist() == [[4]]


def test_step2_example(gpp):
    assert step2_zero_topleft(gpp, REF_PARAMS).tolist() == REF_ZEROED


def test_step3_example(gpp):
    gp = step2_zero_topleft(gpp, REF_PARAMS)
    G, T = step3_blockdiag(gp, gpp, REF_PARAMS)
    assert G.tolist() == REF_G
    assert mat_mul(T, gp) == G
    assert T.array[4, 4] == 1 and not T.array[4, :4].any() and not T.array[:4, 4].any()


def test_step2_mu_zero_is_identity():
    params = SchemeParams(11, 6, 4, 0, 2)
    src = FqMatrix(np.array(REF_SOURCE)[:4], 11)
    assert step2_zero_topleft(src, params) == src


def test_step2_singular_d():
    rows = [r[:] for r in REF_SOURCE]
    rows[4][0] = 0
    with pytest.raises(ConstructionError):
        step2_zero_topleft(FqMatrix(rows, 11), REF_PARAMS)
    with pytest.raises(ConstructionError):
        build_scheme(REF_PARAMS, FqMatrix(rows, 11))


def test_single_block_main_layout_keeps_b():
    params = SchemeParams(13, 7, 5, 1, 4)
    src = cauchy(random_cauchy_spec(Field(13), 5, 7, random.Random(2)))
    s = build_scheme(params, src, layout="partial")
    assert np.array_equal(s.G.array[:4, 1:5], src.array[:4, 1:5])
    assert s.layout == "partial"


def test_build_scheme_matches_example(gpp):
    s = build_scheme(REF_PARAMS, gpp)
    assert s.G.tolist() == REF_G
    assert s.layout == "partial"
    assert s.source == gpp


def test_auto_cauchy_scheme():
    from pdms.audit import classify
    s = build_scheme(SchemeParams(13, 7, 5, 1, 2), seed=4)
    assert classify(s).perfect is True


def test_auto_cauchy_needs_large_field():
    with pytest.raises(ConstructionError):
        build_scheme(SchemeParams(11, 7, 5, 1, 2), seed=0)
    with pytest.raises(ConstructionError):
        build_scheme(REF_PARAMS)


def test_single_group_uses_source_layout():
    params = SchemeParams(17, 6, 4, 1, 3)
    s = build_scheme(params, seed=0)
    assert s.layout == "source" and s.G == s.source


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([(13, 7, 5, 1, 2), (17, 8, 6, 2, 2), (19, 9, 7, 1, 3),
                                               (23, 8, 6, 0, 3), (29, 9, 6, 2, 1)]))
def test_structural_invariants(seed, shape):
    params = SchemeParams(*shape)
    src = cauchy(random_cauchy_spec(params.field, params.k, params.n, random.Random(seed)))
    s = build_scheme(params, src, layout="partial")
    k, mu, pp = params.k, params.mu, params.p
    a = s.G.array
    assert not a[:k - mu, :mu].any()
    for i in range(params.groups):
        for j in range(params.groups):
            blk = a[i * pp:(i + 1) * pp, mu + j * pp:mu + (j + 1) * pp]
            want = src.array[i * pp:(i + 1) * pp, mu + i * pp:mu + (i + 1) * pp]
            assert np.array_equal(blk, want) if i == j else not blk.any()
    assert np.array_equal(a[k - mu:], src.array[k - mu:])
    assert rank(s.G) == k
    assert rank(s.G.vstack(src)) == k  # same row space


def test_build_is_deterministic():
    params = SchemeParams(257, 8, 6, 2, 2)
    a, b = build_scheme(params, seed=9), build_scheme(params, seed=9)
    assert a.G == b.G and a.T == b.T and a.digest == b.digest


def test_descriptor_round_trip(tmp_path, example_scheme):
    d = example_scheme.to_descriptor()
    assert set(d) == {"version", "q", "n", "k", "mu", "p", "G", "source"}
    path = tmp_path / "s.json"
    path.write_bytes(example_scheme.canonical_json())
    again = load_scheme(path)
    assert again.G == example_scheme.G and again.digest == example_scheme.digest
    assert again.decode_vectors == example_scheme.decode_vectors


def test_descriptor_is_canonical(example_scheme):
    raw = example_scheme.canonical_json()
    assert raw == json.dumps(json.loads(raw), sort_keys=True, separators=(",", ":")).encode()
    assert b" " not in raw


def test_descriptor_errors(example_scheme):
    d = example_scheme.to_descriptor()
    for bad in ({**d, "version": 99}, {**d, "G": [[1, 2]]},
                {**d, "G": [[11] * 6] * 5}, {k: v for k, v in d.items() if k != "q"}):
        with pytest.raises(ParameterError):
            scheme_from_descriptor(bad)
    with pytest.raises(ConstructionError):
        scheme_from_descriptor({**d, "G": [[0] * 6] * 5})


def test_flat_descriptor_accepted(example_scheme):
    d = example_scheme.to_descriptor()
    d["G"] = [x for row in d["G"] for x in row]
    assert scheme_from_descriptor(d).G == example_scheme.G


def test_load_matrix_forms(tmp_path):
    (tmp_path / "a.json").write_text(json.dumps(REF_SOURCE))
    (tmp_path / "b.json").write_text(json.dumps({"matrix": REF_SOURCE}))
    (tmp_path / "c.json").write_text(json.dumps({"other": 1}))
    assert load_matrix(tmp_path / "a.json", 11).tolist() == REF_SOURCE
    assert load_matrix(tmp_path / "b.json", 11).tolist() == REF_SOURCE
    with pytest.raises(ParameterError):
        load_matrix(tmp_path / "c.json", 11)
