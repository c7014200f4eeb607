import numpy as np
import pytest

import delcode


def test_channel_identity_and_determinism():
    x = np.random.default_rng(0).integers(0, 2, 500).astype(np.uint8)
    assert np.array_equal(delcode.transmit(x, 0.0, 0.0, seed=3), x)
    a = delcode.transmit(x, 0.1, 0.05, seed=9)
    b = delcode.transmit(x, 0.1, 0.05, seed=9)
    assert np.array_equal(a, b)
    assert len(a) < len(x)
    assert len(delcode.transmit(x, 1.0, 0.0)) == 0
    with pytest.raises(delcode.DelcodeError):
        delcode.transmit(x, 1.5, 0.0)


def test_markers_and_rate():
    cfg = delcode.MarkerConfig([0, 1], 5)
    assert list(delcode.insert_markers([1, 1, 0, 0, 1], cfg)) == [1, 1, 0, 0, 1, 0, 1]
    assert cfg.frame_length(204) == 284
    assert sum(delcode.marker_mask(cfg, 204)) == 80
    assert delcode.overall_rate(cfg, 102, 204) == (5, 14)
    assert delcode.overall_rate(delcode.MarkerConfig([0, 1], 10), 102, 204) == (5, 12)
    with pytest.raises(ValueError):
        delcode.MarkerConfig([0, 2], 5)


def test_interleaver_round_trip():
    il = delcode.Interleaver.make(204, 42)
    assert sorted(il.perm) == list(range(204))
    c = np.random.default_rng(1).integers(0, 2, 204).astype(np.uint8)
    assert np.array_equal(il.deinterleave(il.interleave(c)), c)
    assert list(delcode.Interleaver.make(6, 0).perm) == list(range(6))


def test_conv_and_viterbi():
    m = np.random.default_rng(2).integers(0, 2, 40).astype(np.uint8)
    c = delcode.conv_encode(m)
    assert len(c) == 80
    llr = np.where(c == 1, -10.0, 10.0)
    assert np.array_equal(delcode.viterbi_sdd(llr), m)
    assert np.array_equal(delcode.viterbi_hdd(llr), m)
    assert list(delcode.conv_encode([1, 0, 0])) == [1, 1, 0, 1, 1, 1]


def test_ldpc_noiseless(source_dir):
    code = delcode.OuterCode.ldpc_from_alist(source_dir / "data" / "regular_204_102.alist")
    assert (code.n, code.k) == (204, 102)
    m = np.random.default_rng(3).integers(0, 2, 102).astype(np.uint8)
    cw = code.encode(m)
    assert code.syndrome_ok(cw)
    res = code.spa_decode(np.where(cw == 1, -4.0, 4.0))
    assert res["converged"]
    assert np.array_equal(res["message"], m)


def test_map_detector_matches_enumeration():
    rng = np.random.default_rng(4)
    cfg = delcode.MarkerConfig([0, 1], 3)
    tmpl = delcode.marker_template(cfg, 6)
    assert len(tmpl) == 10
    for _ in range(20):
        x = rng.integers(0, 2, len(tmpl)).astype(np.uint8)
        for i, k in enumerate(tmpl):
            if k >= 0:
                x[i] = k
        y = delcode.transmit(x, 0.1, 0.05, seed=int(rng.integers(1 << 30)))
        fast = delcode.map_detect(y, cfg, 6, 0.1, 0.05, llr_clip=np.inf)
        slow = delcode.brute_force_llrs(y, tmpl, 0.1, 0.05, llr_clip=np.inf)
        coded = [i for i, k in enumerate(tmpl) if k < 0]
        assert np.allclose(fast[coded], slow[coded], atol=1e-9, rtol=0)
    assert delcode.estimate_pd(10, 8) == pytest.approx(0.2)


def test_oracle_suite():
    rep = delcode.oracle_check(instances=200, seed=5)
    assert rep["pass"] and rep["instances"] == 200
    assert rep["max_abs_deviation"] < 1e-9


def test_featurize():
    f = delcode.featurize([0, 1], 3, "pair-window")
    assert f.tolist() == [[1, -1, 0], [-1, 0, 0]]
    g = delcode.featurize([1], 2, "causal-prefix")
    assert g.tolist() == [[-1, -1], [0, 0]]
    assert not delcode.featurize([], 2).any()


def test_run_point_and_sweep(tmp_path, source_dir):
    cfg = tmp_path / "conv.ini"
    cfg.write_text("[code]\nouter = conv\nk = 20\n[channel]\npd = 0.0, 0.1\n[sim]\nmax_frames = 16\n")
    clean = delcode.run_point(cfg, 0.0)
    assert clean["frames"] == 16 and clean["ber"] == 0.0
    a = delcode.sweep_csv(cfg)
    assert a == delcode.sweep_csv(cfg)
    lines = a.strip().split("\n")
    assert lines[0] == "pd,ps,assumed_ps,frames,bit_errors,frame_errors,ber,fer,wall_time"
    assert len(lines) == 3
    bad = tmp_path / "bad.ini"
    bad.write_text("[code]\nouter = conv\n[sim]\nframes = 3\n")
    with pytest.raises(delcode.DelcodeError, match="sim.frames"):
        delcode.run_point(bad, 0.0)
