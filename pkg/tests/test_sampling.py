"""Greedy max-cut partition and channel down/upsampling."""

from __future__ import annotations

import numpy as np
import pytest

import graphfb as gf
from graphfb import sampling
from graphfb.errors import InputError
from conftest import all_cut_values, brute_force_max_cut


def test_k3_partition_frozen(k3):
    # Seed = vertex 0, first merge ties at gain 0 and continues: V_L = {0, 1}.
    pat = sampling.greedy_max_cut(gf.laplacian(k3))
    assert pat.keep_low == (0, 1)
    assert pat.keep_high == (2,)
    assert sampling.cut_value(k3, pat) == pytest.approx(2.0, abs=1e-12)


def test_ring4_partition_frozen(ring4):
    # Opposite corners get the full cut of 4.
    pat = sampling.greedy_max_cut(gf.laplacian(ring4))
    assert pat.keep_low == (0, 2)
    assert sampling.cut_value(ring4, pat) == pytest.approx(4.0, abs=1e-12)


def test_path4_partition_frozen(path4):
    # Max-degree seed is vertex 1; vertex 3 joins; cut value 3 of 3 edges.
    pat = sampling.greedy_max_cut(gf.laplacian(path4))
    assert pat.keep_low == (1, 3)
    assert sampling.cut_value(path4, pat) == pytest.approx(3.0, abs=1e-12)


def test_path2_partition(path2):
    pat = sampling.greedy_max_cut(gf.laplacian(path2))
    assert pat.keep_low == (0,)
    assert pat.keep_high == (1,)


def test_sign_vector_matches_partition():
    g = gf.generate("random_geometric", 15, seed=1)
    pat = sampling.greedy_max_cut(gf.laplacian(g))
    assert set(pat.keep_low) | set(pat.keep_high) == set(range(g.n))
    assert not set(pat.keep_low) & set(pat.keep_high)
    for v in pat.keep_low:
        assert pat.sign[v] == 1.0
    for v in pat.keep_high:
        assert pat.sign[v] == -1.0


def test_cut_value_equals_quadratic_form():
    # cut(V_L, V_H) = s^T L s / 4 for the sign vector s.
    for seed in range(4):
        g = gf.generate("random_geometric", 12, seed=seed)
        l_matrix = gf.laplacian(g)
        pat = sampling.greedy_max_cut(l_matrix)
        expected = float(pat.sign @ l_matrix @ pat.sign) / 4.0
        assert sampling.cut_value(g, pat) == pytest.approx(expected, rel=1e-12)


def test_greedy_beats_90th_percentile_of_all_cuts():
    for seed in range(6):
        g = gf.generate("random_geometric", 9, seed=seed)
        pat = sampling.greedy_max_cut(gf.laplacian(g))
        greedy = sampling.cut_value(g, pat)
        vals = all_cut_values(g)
        assert greedy >= np.percentile(vals, 90) - 1e-12


def test_greedy_exact_on_structured_fixtures():
    for kind, n in (("ring", 6), ("path", 5), ("complete", 4)):
        g = gf.generate(kind, n)
        pat = sampling.greedy_max_cut(gf.laplacian(g))
        assert sampling.cut_value(g, pat) == pytest.approx(brute_force_max_cut(g), abs=1e-12)


def test_both_sides_nonempty_always():
    # The loop guard must leave V_H non-empty even on complete graphs
    # where every greedy gain stays non-negative for a while.
    for n in (2, 3, 5, 8):
        g = gf.generate("complete", n)
        pat = sampling.greedy_max_cut(gf.laplacian(g))
        assert len(pat.keep_low) >= 1
        assert len(pat.keep_high) >= 1


def test_weighted_graph_prefers_heavy_edge_cut():
    # One heavy edge dominates: the greedy cut must separate its endpoints.
    g = gf.Graph(4, ((0, 1, 10.0), (1, 2, 0.1), (2, 3, 0.1), (3, 0, 0.1)))
    pat = sampling.greedy_max_cut(gf.laplacian(g))
    assert (0 in pat.keep_low) != (1 in pat.keep_low)


# -- Pattern object -----------------------------------------------------------


def test_pattern_validation_rejects_overlap():
    with pytest.raises(InputError):
        sampling.SamplingPattern(keep_low=(0, 1), keep_high=(1, 2), sign=np.array([1.0, 1.0, -1.0]))


def test_pattern_validation_rejects_empty_side():
    with pytest.raises(InputError):
        sampling.SamplingPattern(keep_low=(0, 1, 2), keep_high=(), sign=np.array([1.0, 1.0, 1.0]))


def test_pattern_from_low_set():
    pat = sampling.SamplingPattern.from_low_set(4, [0, 2])
    assert pat.keep_low == (0, 2)
    assert pat.keep_high == (1, 3)
    np.testing.assert_allclose(pat.sign, [1.0, -1.0, 1.0, -1.0])


def test_pattern_dict_round_trip():
    pat = sampling.SamplingPattern.from_low_set(5, [1, 3])
    again = sampling.SamplingPattern.from_dict(pat.to_dict())
    assert again.keep_low == pat.keep_low
    assert again.keep_high == pat.keep_high


# -- Down/upsampling ----------------------------------------------------------


def test_downsample_picks_channel_entries():
    pat = sampling.SamplingPattern.from_low_set(4, [0, 2])
    f = np.array([10.0, 20.0, 30.0, 40.0])
    np.testing.assert_allclose(sampling.downsample(f, pat, "low"), [10.0, 30.0])
    np.testing.assert_allclose(sampling.downsample(f, pat, "high"), [20.0, 40.0])


def test_upsample_then_downsample_is_identity():
    pat = sampling.SamplingPattern.from_low_set(5, [1, 2])
    f_low = np.array([1.5, -2.5])
    up = sampling.upsample(f_low, pat, "low")
    assert up.shape == (5,)
    np.testing.assert_allclose(sampling.downsample(up, pat, "low"), f_low)


def test_down_then_up_masks_other_channel():
    pat = sampling.SamplingPattern.from_low_set(4, [0, 3])
    f = np.arange(4.0)
    masked = sampling.upsample(sampling.downsample(f, pat, "low"), pat, "low")
    np.testing.assert_allclose(masked, [0.0, 0.0, 0.0, 3.0])


def test_channel_sum_reconstructs():
    # The two channel projections partition the identity.
    pat = sampling.SamplingPattern.from_low_set(6, [0, 2, 4])
    f = np.random.default_rng(0).standard_normal(6)
    low = sampling.upsample(sampling.downsample(f, pat, "low"), pat, "low")
    high = sampling.upsample(sampling.downsample(f, pat, "high"), pat, "high")
    np.testing.assert_allclose(low + high, f, atol=0)


def test_downsample_rejects_bad_channel():
    pat = sampling.SamplingPattern.from_low_set(2, [0])
    with pytest.raises(InputError):
        sampling.downsample(np.zeros(2), pat, "mid")
