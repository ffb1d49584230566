"""Exit-probability and gradient estimator: algebra, CRN coupling, merging."""

import numpy as np
import pytest

import fountain_id as fid
from fountain_id import estimator
from fountain_id.errors import InvalidSource, MixedProvenance
from fountain_id.estimator import boundary_term, estimate, merge


@pytest.fixture(scope="module")
def fast_bm():
    return fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3)


class TestBasics:
    def test_rejects_empty_ensemble(self, fast_bm, bump_source, layout5):
        with pytest.raises(InvalidSource):
            estimate(fast_bm, bump_source, layout5, M=0, master_seed=0)

    def test_p_hat_matches_oracle(self, fast_bm, bump_source, layout5):
        bundle = estimate(fast_bm, bump_source, layout5, M=100_000, master_seed=1)
        p = fid.source_exit_probability(bump_source, layout5)
        allowance = 3 * bundle.se_p + 0.5 * np.sqrt(fast_bm.dt)
        assert np.all(np.abs(bundle.p_hat - p) <= allowance)

    def test_determinism_and_crn_coupling(self, fast_bm, layout5):
        a = estimate(
            fast_bm,
            fid.SourceSpec(np.array([-0.4, 0.1]), 0.15, fid.Profile.BUMP),
            layout5, M=2000, master_seed=2,
        )
        b = estimate(
            fast_bm,
            fid.SourceSpec(np.array([-0.4, 0.1]), 0.15, fid.Profile.BUMP),
            layout5, M=2000, master_seed=2,
        )
        np.testing.assert_array_equal(a.p_hat, b.p_hat)
        np.testing.assert_array_equal(a.grad_p_hat, b.grad_p_hat)
        # common random numbers: shifting theta reuses the same unit-ball
        # draws and path noise, so estimates at nearby thetas are coupled
        c = estimate(
            fast_bm,
            fid.SourceSpec(np.array([-0.4 + 1e-9, 0.1]), 0.15, fid.Profile.BUMP),
            layout5, M=2000, master_seed=2,
        )
        assert np.max(np.abs(c.p_hat - a.p_hat)) < 1e-6

    def test_seed_key_gives_disjoint_streams(self, fast_bm, bump_source, layout5):
        a = estimate(fast_bm, bump_source, layout5, M=2000, master_seed=3, seed_key=(0,))
        b = estimate(fast_bm, bump_source, layout5, M=2000, master_seed=3, seed_key=(1,))
        assert np.any(a.p_hat != b.p_hat)

    def test_absorbed_paths_counted(self, bump_source, layout5):
        plmp = fid.PlmpSpec(speed=0.1, sigma_s=0.8, sigma_a=0.1)
        bundle = estimate(plmp, bump_source, layout5, M=5000, master_seed=4)
        assert bundle.n_absorbed > 0
        # absorbed paths reach no detector, so total mass is well below one
        assert bundle.p_hat.sum() < 1.0


class TestBoundaryTerm:
    def test_bump_profile_never_invokes_boundary_machinery(
        self, fast_bm, bump_source, layout5
    ):
        before = estimator._boundary_term_calls
        bundle = estimate(fast_bm, bump_source, layout5, M=1000, master_seed=5)
        assert estimator._boundary_term_calls == before
        assert bundle.boundary_hits is None
        assert bundle.boundary_coef == 0.0

    def test_boundary_term_rejects_bump(self, fast_bm, bump_source, layout5):
        with pytest.raises(InvalidSource):
            boundary_term(fast_bm, bump_source, layout5, 16, 10, master_seed=0)

    def test_uniform_profile_carries_boundary_data(
        self, fast_bm, uniform_source, layout5
    ):
        bundle = estimate(
            fast_bm, uniform_source, layout5, M=1000, master_seed=6,
            boundary_nodes=16, boundary_paths_per_node=50,
        )
        assert bundle.boundary_hits.shape == (layout5.count, 16)
        assert bundle.boundary_coef > 0.0
        # the correction is part of the reported gradient
        interior_only = bundle.grad_sum / bundle.M
        assert np.any(bundle.grad_p_hat != interior_only)


class TestGradient:
    @pytest.mark.parametrize("profile", list(fid.Profile))
    def test_gradient_matches_central_difference(self, profile, layout5):
        # CRN finite differences: independent seed blocks give an honest SE
        process = fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3)
        theta, beta, h = np.array([-0.3, 0.15]), 0.2, 0.02
        blocks, m_block = 12, 20_000
        bundle = estimate(
            process, fid.SourceSpec(theta, beta, profile), layout5,
            M=blocks * m_block, master_seed=7,
        )
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = h
            diffs = np.empty((blocks, layout5.count))
            for blk in range(blocks):
                up = estimate(
                    process, fid.SourceSpec(theta + e, beta, profile), layout5,
                    M=m_block, master_seed=7, seed_key=(blk,),
                )
                dn = estimate(
                    process, fid.SourceSpec(theta - e, beta, profile), layout5,
                    M=m_block, master_seed=7, seed_key=(blk,),
                )
                diffs[blk] = (up.p_hat - dn.p_hat) / (2 * h)
            fd = diffs.mean(axis=0)
            fd_se = diffs.std(axis=0, ddof=1) / np.sqrt(blocks)
            combined = 3 * np.sqrt(fd_se**2 + bundle.se_grad[:, axis] ** 2) + 1e-3
            assert np.all(np.abs(bundle.grad_p_hat[:, axis] - fd) <= combined)

    def test_include_beta_gradient(self, fast_bm, uniform_source, layout5):
        bundle = estimate(
            fast_bm, uniform_source, layout5, M=2000, master_seed=8,
            include_beta_gradient=True,
        )
        assert bundle.beta_grad is not None
        assert bundle.beta_grad.shape == (layout5.count,)
        without = estimate(fast_bm, uniform_source, layout5, M=2000, master_seed=8)
        assert without.beta_grad is None


class TestMerge:
    def test_merge_equals_single_pass(self, fast_bm, bump_source, layout5):
        parts = [
            estimate(fast_bm, bump_source, layout5, M=500, master_seed=9, seed_key=(i,))
            for i in range(3)
        ]
        pooled = merge(parts)
        assert pooled.M == 1500
        np.testing.assert_allclose(
            pooled.hit_w_sum, np.sum([p.hit_w_sum for p in parts], axis=0)
        )
        np.testing.assert_allclose(
            pooled.p_hat, np.mean([p.p_hat for p in parts], axis=0), rtol=1e-12
        )
        assert pooled.n_absorbed == sum(p.n_absorbed for p in parts)

    def test_merge_rejects_empty(self):
        with pytest.raises(MixedProvenance):
            merge([])

    def test_merge_rejects_mixed_specs(self, fast_bm, bump_source, uniform_source, layout5):
        a = estimate(fast_bm, bump_source, layout5, M=100, master_seed=10)
        b = estimate(fast_bm, uniform_source, layout5, M=100, master_seed=10)
        with pytest.raises(MixedProvenance):
            merge([a, b])

    def test_bundle_to_dict_roundtrip_fields(self, fast_bm, bump_source, layout5):
        bundle = estimate(fast_bm, bump_source, layout5, M=100, master_seed=11)
        d = bundle.to_dict()
        assert d["M"] == 100
        assert len(d["p_hat"]) == layout5.count
        assert d["spec_hash"] == bundle.provenance
