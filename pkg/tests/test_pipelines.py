import numpy as np
import pytest

from prorl.mdp import random_mdp
from prorl.oracle import capped_unregularized_value
from prorl.pipelines import (
    CSV_HEADER,
    ExperimentConfig,
    PipelineError,
    resolve_data_dist,
    resolve_mdp,
    run_pro_rl,
    run_pro_rl_bc,
)
from prorl.regularizers import Regularizer
from prorl.suites import capped_fixture, counterexample_fixture

REG = Regularizer().to_config()


def base_config(**over):
    payload = dict(
        mdp={"kind": "random", "num_states": 5, "num_actions": 3, "gamma": 0.8, "seed": 2},
        data_dist={"kind": "uniform_policy"},
        reg=REG,
        alpha=0.3,
        n=1500,
        n0=300,
        seed=0,
        classes={"kind": "realizable", "num_distractors": 6, "seed": 0},
    )
    payload.update(over)
    return ExperimentConfig(**payload)


class TestConfigValidation:
    def test_unknown_variant_kind(self):
        with pytest.raises(PipelineError, match="variant kind"):
            base_config(variant={"kind": "bogus"})

    def test_unknown_classes_kind(self):
        with pytest.raises(PipelineError, match="classes kind"):
            base_config(classes={"kind": "bogus"})

    def test_alpha_zero_requires_matching_variant(self):
        with pytest.raises(PipelineError, match="alpha=0 exactly"):
            base_config(alpha=0.0)
        with pytest.raises(PipelineError, match="alpha=0 exactly"):
            base_config(variant={"kind": "alpha_zero"})

    def test_alpha_zero_rejects_unconstrained_classes(self):
        with pytest.raises(PipelineError, match="floor"):
            base_config(alpha=0.0, variant={"kind": "alpha_zero"})

    def test_capped_needs_cap_and_behavior_data(self):
        with pytest.raises(PipelineError, match="cap"):
            base_config(variant={"kind": "capped"})
        with pytest.raises(PipelineError, match="behavior-policy"):
            base_config(
                variant={"kind": "capped", "cap": 2.0},
                data_dist={"kind": "explicit", "mass": [[1.0]]},
            )

    def test_inexact_needs_both_slacks(self):
        with pytest.raises(PipelineError, match="eps_ov"):
            base_config(variant={"kind": "inexact", "eps_ov": 0.01})

    def test_delta_range(self):
        with pytest.raises(PipelineError, match="delta"):
            base_config(delta=0.0)

    def test_from_dict_rejects_unknown_keys(self):
        payload = base_config().to_dict()
        payload["typo"] = 1
        with pytest.raises(PipelineError, match="unknown config keys"):
            ExperimentConfig.from_dict(payload)

    def test_round_trip_preserves_hash(self):
        cfg = base_config(w_order=(1, 0))
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again.config_hash == cfg.config_hash
        assert again.w_order == (1, 0)

    def test_hash_distinguishes_seeds(self):
        assert base_config(seed=0).config_hash != base_config(seed=1).config_hash


class TestResolvers:
    def test_inline_mdp_round_trip(self):
        mdp = random_mdp(4, 2, 0.7, seed=9)
        spec = {"kind": "inline", **mdp.to_dict()}
        again = resolve_mdp(spec)
        np.testing.assert_allclose(again.transition, mdp.transition)
        np.testing.assert_allclose(again.reward, mdp.reward)
        assert again.gamma == mdp.gamma

    def test_unknown_mdp_kind(self):
        with pytest.raises(PipelineError, match="mdp kind"):
            resolve_mdp({"kind": "bogus"})

    def test_explicit_data_dist_shape_check(self):
        mdp = random_mdp(3, 2, 0.8, seed=0)
        with pytest.raises(PipelineError, match="shape"):
            resolve_data_dist(mdp, {"kind": "explicit", "mass": [[0.5, 0.5]]})

    def test_explicit_data_dist_must_normalize(self):
        mdp = random_mdp(3, 2, 0.8, seed=0)
        mass = np.full((3, 2), 0.2)
        with pytest.raises(PipelineError, match="distribution"):
            resolve_data_dist(mdp, {"kind": "explicit", "mass": mass.tolist()})

    def test_explicit_data_dist_conditional_policy(self):
        mdp = random_mdp(3, 2, 0.8, seed=0)
        mass = np.zeros((3, 2))
        mass[0, 0] = 0.75
        mass[1, 1] = 0.25
        dd, pi_d = resolve_data_dist(mdp, {"kind": "explicit", "mass": mass.tolist()})
        np.testing.assert_allclose(dd, mass)
        np.testing.assert_allclose(pi_d.probs[0], [1.0, 0.0])
        np.testing.assert_allclose(pi_d.probs[2], [0.5, 0.5])  # uniform fallback


class TestRunProRl:
    def test_report_row_matches_header(self):
        report = run_pro_rl(base_config())
        assert len(report.to_row()) == len(CSV_HEADER)
        assert tuple(report.to_dict()) == CSV_HEADER

    def test_deterministic_given_config(self):
        a = run_pro_rl(base_config(seed=5))
        b = run_pro_rl(base_config(seed=5))
        assert a.to_row() == b.to_row()

    def test_seed_changes_dataset(self):
        values = {run_pro_rl(base_config(seed=s)).eps_hat for s in range(3)}
        assert len(values) > 1

    def test_gap_chain_and_sanity(self):
        gamma = 0.8
        report = run_pro_rl(base_config(seed=3))
        assert report.j_star_alpha <= report.j_star_zero + 1e-9
        assert report.j_ref == pytest.approx(report.j_star_alpha, abs=1e-12)
        mid = report.pi_l1 / (1 - gamma)
        assert report.gap_ref <= mid + 1e-9
        assert mid <= 2 * report.w_dev / (1 - gamma) + 1e-9
        assert report.w_max <= report.b_w + 1e-9
        assert report.kkt_residual < 1e-8
        assert report.rhs_realized >= 0.0
        assert report.n2 is None and report.pi_l1_bc is None

    def test_realizable_classes_have_zero_approximation_error(self):
        report = run_pro_rl(base_config(seed=1))
        assert report.eps_rv == 0.0 and report.eps_rw == 0.0

    def test_misspecified_classes_report_approximation_error(self):
        report = run_pro_rl(
            base_config(
                classes={
                    "kind": "misspecified",
                    "perturbation": 0.1,
                    "num_distractors": 4,
                    "seed": 1,
                }
            )
        )
        assert report.eps_rv > 0.0 and report.eps_rw > 0.0

    def test_inexact_variant_reports_achieved_slacks(self):
        # the solver draws among qualifying pairs, so the achieved slacks are
        # bounded by the requested ones but need not equal them
        reports = [
            run_pro_rl(
                base_config(
                    seed=s, variant={"kind": "inexact", "eps_ov": 0.05, "eps_ow": 0.05}
                )
            )
            for s in range(4)
        ]
        for report in reports:
            assert report.variant == "inexact"
            assert 0.0 <= report.eps_ov <= 0.05 + 1e-12
            assert 0.0 <= report.eps_ow <= 0.05 + 1e-12
        again = run_pro_rl(
            base_config(seed=0, variant={"kind": "inexact", "eps_ov": 0.05, "eps_ow": 0.05})
        )
        assert again.to_row() == reports[0].to_row()

    def test_capped_reference_matches_oracle(self):
        fx = capped_fixture()
        cfg = ExperimentConfig(
            mdp=fx["mdp"],
            data_dist=fx["data_dist"],
            reg=fx["reg"],
            alpha=0.1,
            n=800,
            n0=80,
            seed=0,
            classes={"kind": "constrained", "num_distractors": 4, "seed": 0},
            variant={"kind": "capped", "cap": fx["cap"]},
        )
        report = run_pro_rl(cfg)
        mdp = resolve_mdp(fx["mdp"])
        dd, _ = resolve_data_dist(mdp, fx["data_dist"])
        j_cap, _ = capped_unregularized_value(mdp, dd, fx["cap"])
        assert report.j_ref == pytest.approx(j_cap, abs=1e-10)
        assert report.rhs_capped is not None and report.rhs_capped > 0
        assert report.w_max <= fx["cap"] + 1e-9

    def test_exact_frequency_dataset_kills_deviation(self):
        # exact per-cell frequencies make the empirical objective equal the
        # population one, so the realized class deviation collapses to zero
        fx = counterexample_fixture()
        cfg = ExperimentConfig(
            mdp=fx["mdp"],
            data_dist=fx["data_dist"],
            reg=fx["reg"],
            alpha=0.0,
            n=6,
            n0=1,
            seed=0,
            classes=fx["classes"],
            variant={"kind": "alpha_zero"},
            dataset={"kind": "exact_frequency", "repeats": 2},
        )
        report = run_pro_rl(cfg)
        assert report.n == 12  # two repeats of the six covered cells
        assert report.eps_hat < 1e-12


class TestRunProRlBc:
    def test_requires_bc_settings(self):
        with pytest.raises(PipelineError, match="bc settings"):
            run_pro_rl_bc(base_config())

    def test_splits_and_reports_cloning_fields(self):
        cfg = base_config(
            n=2500,
            bc={
                "n1": 2000,
                "kind": "target_plus_mixes",
                "mix_grid": [0.1, 0.4],
                "directions": ["uniform", "roll1"],
            },
        )
        report = run_pro_rl_bc(cfg)
        assert report.n2 == 500
        assert report.pi_l1_bc is not None and report.pi_l1_bc >= 0.0
        assert report.bc_sample_term > 0.0

    def test_unknown_mix_direction(self):
        cfg = base_config(
            n=2500,
            bc={"n1": 2000, "kind": "target_plus_mixes", "directions": ["sideways"]},
        )
        with pytest.raises(PipelineError, match="direction"):
            run_pro_rl_bc(cfg)

    def test_empty_cloning_split_rejected(self):
        cfg = base_config(n=2000, bc={"n1": 2000, "kind": "target_plus_mixes"})
        with pytest.raises(PipelineError, match="cloning split"):
            run_pro_rl_bc(cfg)
