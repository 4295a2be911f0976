"""Classifier: predictive likelihood, class priors, Bayes combination."""

from __future__ import annotations

import math
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirimult.classifier import (
    ClassPrior,
    FittedModel,
    classify,
    classify_batch,
    empirical_class_prior,
    fit_model,
    log_normalize,
    log_predictive_likelihood,
)
from dirimult.conjugate import (
    CountVector,
    DirichletParams,
    PriorFamily,
    Typology,
    marginal_beta,
    perks_prior,
    posterior_update,
)
from dirimult.dataio import load_demo_queries, parse_training_csv
from dirimult.errors import ValidationError

from helpers import (
    PERIODS,
    POSTERIOR_SEVENTHS,
    compositions,
    exact_classify_single_arrow,
    exact_mean,
    exact_predictive,
)


class TestLogPredictiveLikelihood:
    def test_perks_two_types_pair(self):
        # Perks prior, J=2, one count on each type: exact value 1/4
        prior = perks_prior(Typology(("a", "b")))
        got = log_predictive_likelihood(prior, CountVector((1, 1)))
        assert got == pytest.approx(math.log(0.25), abs=1e-14)

    @pytest.mark.parametrize("period", PERIODS)
    @pytest.mark.parametrize("j", range(7))
    def test_single_count_reduces_to_posterior_mean(self, period_model, period, j):
        # a single observation's predictive is exactly the posterior mean
        post = period_model.posteriors[PERIODS.index(period)]
        counts = tuple(1 if k == j else 0 for k in range(7))
        got = log_predictive_likelihood(post, CountVector(counts))
        assert got == pytest.approx(math.log(exact_mean(period, j)), abs=1e-12)

    def test_matches_exact_rational_oracle(self, period_model):
        cases = [
            ("P3", (0, 0, 1, 1, 0, 0, 2)),
            ("P1", (2, 0, 0, 0, 0, 0, 1)),
            ("P5", (0, 1, 0, 2, 0, 0, 3)),
            ("P2", (1, 1, 1, 1, 1, 1, 1)),
        ]
        for period, counts in cases:
            post = period_model.posteriors[PERIODS.index(period)]
            exact = exact_predictive(POSTERIOR_SEVENTHS[period], 7, counts)
            got = log_predictive_likelihood(post, CountVector(counts))
            assert got == pytest.approx(math.log(exact), rel=1e-12)

    def test_zero_total_rejected(self, period_model):
        with pytest.raises(ValidationError, match="zero total"):
            log_predictive_likelihood(
                period_model.posteriors[0], CountVector((0,) * 7)
            )

    def test_dimension_mismatch(self, period_model):
        with pytest.raises(ValidationError):
            log_predictive_likelihood(period_model.posteriors[0], CountVector((1, 2)))

    def test_finite_for_huge_totals(self, period_model):
        counts = (10**6, 0, 0, 0, 10**5, 0, 3)
        got = log_predictive_likelihood(period_model.posteriors[2], CountVector(counts))
        assert math.isfinite(got)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_normalizes_over_compositions_j7(self, period_model, n):
        post = period_model.posteriors[2]
        total = math.fsum(
            math.exp(log_predictive_likelihood(post, CountVector(c)))
            for c in compositions(n, 7)
        )
        assert total == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_normalizes_over_compositions_j3(self, n):
        post = posterior_update(
            perks_prior(Typology(("a", "b", "c"))), CountVector((3, 0, 9))
        )
        total = math.fsum(
            math.exp(log_predictive_likelihood(post, CountVector(c)))
            for c in compositions(n, 3)
        )
        assert total == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=40)
    @given(
        y=st.lists(st.integers(0, 4), min_size=3, max_size=3),
        z=st.lists(st.integers(0, 4), min_size=3, max_size=3),
    )
    def test_chain_rule_with_coefficient_accounting(self, y, z):
        # scoring y then z (posterior updated in between) differs from
        # scoring y+z jointly exactly by the multinomial coefficients
        if sum(y) == 0 or sum(z) == 0:
            return
        post = posterior_update(
            perks_prior(Typology(("a", "b", "c"))), CountVector((2, 5, 1))
        )
        cy, cz = CountVector(tuple(y)), CountVector(tuple(z))
        joint = cy + cz

        def log_coef(cv: CountVector) -> float:
            return math.lgamma(cv.n + 1) - math.fsum(
                math.lgamma(v + 1) for v in cv.counts
            )

        sequential = log_predictive_likelihood(post, cy) + log_predictive_likelihood(
            posterior_update(post, cy), cz
        )
        jointly = log_predictive_likelihood(post, joint)
        correction = log_coef(cy) + log_coef(cz) - log_coef(joint)
        assert sequential == pytest.approx(jointly + correction, abs=1e-10)

    @pytest.mark.parametrize(
        "j,hi,lo",
        [
            (1, "P1", "P3"),  # type 2: highest mean under P1, lowest under P3
            (6, "P5", "P2"),  # type 7: highest mean under P5, lowest under P2
        ],
    )
    def test_monotone_advantage(self, period_model, j, hi, lo):
        post_hi = period_model.posteriors[PERIODS.index(hi)]
        post_lo = period_model.posteriors[PERIODS.index(lo)]
        for base in compositions(3, 7):
            q0 = CountVector(base) + CountVector(tuple(1 if k == j else 0 for k in range(7)))
            q1 = q0 + CountVector(tuple(1 if k == j else 0 for k in range(7)))
            adv0 = log_predictive_likelihood(post_hi, q0) - log_predictive_likelihood(
                post_lo, q0
            )
            adv1 = log_predictive_likelihood(post_hi, q1) - log_predictive_likelihood(
                post_lo, q1
            )
            assert adv1 >= adv0 - 1e-12


class TestEmpiricalClassPrior:
    def test_even_split(self):
        prior = empirical_class_prior(("A", "B"), ["A", "A", "B", "B"])
        assert prior.probs == (0.5, 0.5)

    def test_twenty_sites(self):
        labels = ["P1"] * 3 + ["P2"] * 4 + ["P3"] * 7 + ["P4"] * 3 + ["P5"] * 3
        prior = empirical_class_prior(PERIODS, labels)
        assert prior.probs == (0.15, 0.20, 0.35, 0.15, 0.15)

    def test_single_class_forces_one(self):
        prior = empirical_class_prior(("A", "B", "C"), ["B", "B"])
        assert prior.probs == (0.0, 1.0, 0.0)

    def test_unknown_label(self):
        with pytest.raises(ValidationError):
            empirical_class_prior(("A", "B"), ["A", "X"])

    def test_empty(self):
        with pytest.raises(ValidationError):
            empirical_class_prior(("A", "B"), [])


class TestClassPrior:
    def test_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            ClassPrior((0.5, 0.6))

    def test_bounds(self):
        with pytest.raises(ValidationError):
            ClassPrior((1.5, -0.5))

    def test_uniform(self):
        assert ClassPrior.uniform(4).probs == (0.25,) * 4


class TestLogNormalize:
    def test_shift_invariance(self):
        weights = [-3.0, -1.5, -7.0]
        base = log_normalize(weights)
        for shift in (-100.0, 0.123, 50.0):
            shifted = log_normalize([w + shift for w in weights])
            for a, b in zip(base, shifted):
                assert a == pytest.approx(b, abs=1e-12)

    def test_sums_to_one(self):
        probs = log_normalize([-1000.0, -1001.0, -999.5])
        assert math.fsum(probs) == pytest.approx(1.0, abs=1e-12)

    def test_all_minus_inf_rejected(self):
        with pytest.raises(ValidationError):
            log_normalize([float("-inf"), float("-inf")])

    def test_argmax_stable_under_monotone_transforms(self, period_model):
        # any strictly increasing map of the unnormalized scores keeps the
        # winner (note: transforming the *class prior* alone does not)
        result = classify(period_model, CountVector((0, 1, 0, 2, 0, 0, 3)))
        order = sorted(
            range(5), key=lambda i: result.log_unnormalized[i], reverse=True
        )
        for transform in (math.exp, lambda w: 3.0 * w + 11.0, math.atan):
            transformed = [transform(w) for w in result.log_unnormalized]
            t_order = sorted(range(5), key=lambda i: transformed[i], reverse=True)
            assert t_order == order
            assert period_model.class_labels[t_order[0]] == result.argmax


class TestClassify:
    def test_single_type7_arrow(self, period_model):
        result = classify(period_model, CountVector((0, 0, 0, 0, 0, 0, 1)))
        exact = exact_classify_single_arrow(6)
        assert result.argmax == "P3"
        for got, want in zip(result.probs, exact):
            assert got == pytest.approx(float(want), abs=1e-10)
        assert math.fsum(result.probs) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_model_is_uniform(self, typology7):
        post = posterior_update(perks_prior(typology7), CountVector((1, 2, 0, 0, 1, 0, 3)))
        model = FittedModel(
            typology=typology7,
            class_labels=("A", "B", "C"),
            posteriors=(post, post, post),
            prior=ClassPrior.uniform(3),
        )
        result = classify(model, CountVector((0, 1, 0, 0, 0, 0, 2)))
        for p in result.probs:
            assert p == pytest.approx(1 / 3, abs=1e-12)

    def test_tie_breaks_to_first_class(self, typology7):
        post = perks_prior(typology7)
        model = FittedModel(
            typology=typology7,
            class_labels=("B", "A"),
            posteriors=(post, post),
            prior=ClassPrior.uniform(2),
        )
        assert classify(model, CountVector((1, 0, 0, 0, 0, 0, 0))).argmax == "B"

    def test_zero_prior_class_gets_zero(self, typology7):
        post = perks_prior(typology7)
        model = FittedModel(
            typology=typology7,
            class_labels=("A", "B", "C"),
            posteriors=(post, post, post),
            prior=ClassPrior((0.5, 0.0, 0.5)),
        )
        with pytest.warns(RuntimeWarning, match="zero prior"):
            result = classify(model, CountVector((1, 0, 0, 0, 0, 0, 0)))
        assert result.probs[1] == 0.0
        assert result.log_unnormalized[1] == float("-inf")
        assert len(result.probs) == 3  # stable length, class kept

    def test_dimension_mismatch(self, period_model):
        with pytest.raises(ValidationError):
            classify(period_model, CountVector((1, 0)))

    def test_zero_total_rejected(self, period_model):
        with pytest.raises(ValidationError):
            classify(period_model, CountVector((0,) * 7))

    def test_totals_in_the_thousands_stay_finite_and_normalized(self, period_model):
        # the compound pmf decays only polynomially in the total (the
        # rising factorials cancel the n log n terms), but the lgamma
        # intermediates are ~n log n and everything must stay finite
        query = CountVector((700, 100, 700, 900, 400, 100, 2100))
        result = classify(period_model, query)
        assert all(math.isfinite(ll) for ll in result.log_likelihoods)
        assert math.fsum(result.probs) == pytest.approx(1.0, abs=1e-12)
        assert result.argmax == "P3"


class TestClassifyBatch:
    def test_empty(self, period_model):
        assert classify_batch(period_model, []) == []

    def test_singleton_matches_classify(self, period_model):
        q = CountVector((1, 0, 2, 0, 0, 0, 1))
        assert classify_batch(period_model, [q]) == [classify(period_model, q)]

    def test_zero_total_flagged(self, period_model):
        batch = classify_batch(
            period_model,
            [CountVector((0,) * 7), CountVector((0, 0, 0, 0, 0, 0, 1))],
        )
        flagged, scored = batch
        assert flagged.no_evidence
        assert flagged.probs == period_model.prior.probs
        assert flagged.log_likelihoods == (0.0,) * 5
        assert flagged.argmax == "P3"  # the prior's own argmax
        assert not scored.no_evidence

    def test_demo_corpus_probabilities_normalize(self, period_model):
        queries = load_demo_queries()
        assert len(queries) == 25
        results = classify_batch(period_model, [q.counts for q in queries])
        assert len(results) == 25
        for r in results:
            assert math.fsum(r.probs) == pytest.approx(1.0, abs=1e-12)


class TestFittedModel:
    def test_needs_two_classes(self, typology7):
        with pytest.raises(ValidationError):
            FittedModel(
                typology=typology7,
                class_labels=("only",),
                posteriors=(perks_prior(typology7),),
                prior=ClassPrior((1.0,)),
            )

    def test_posterior_dims_checked(self, typology7):
        with pytest.raises(ValidationError):
            FittedModel(
                typology=typology7,
                class_labels=("A", "B"),
                posteriors=(perks_prior(typology7), DirichletParams((1.0, 1.0))),
                prior=ClassPrior.uniform(2),
            )

    def test_prior_length_checked(self, typology7):
        post = perks_prior(typology7)
        with pytest.raises(ValidationError):
            FittedModel(
                typology=typology7,
                class_labels=("A", "B"),
                posteriors=(post, post),
                prior=ClassPrior.uniform(3),
            )


class TestFitModel:
    def test_jeffreys_adds_half(self, period_corpus):
        model = fit_model(
            period_corpus,
            prior_family=PriorFamily.JEFFREYS,
            class_prior="uniform",
        )
        totals = period_corpus.class_totals()
        for label, post in zip(model.class_labels, model.posteriors):
            for a, y in zip(post.alpha, totals[label].counts):
                assert a == y + 0.5

    def test_haldane_needs_full_support(self, period_corpus):
        with pytest.raises(ValidationError, match="improper"):
            fit_model(period_corpus, prior_family=PriorFamily.HALDANE)

    def test_haldane_posterior_is_raw_counts(self):
        csv = (
            "site_id,class,x,y\n"
            "s1,A,3,1\n"
            "s2,B,2,5\n"
        )
        model = fit_model(
            parse_training_csv(csv),
            prior_family=PriorFamily.HALDANE,
            class_prior="uniform",
        )
        assert model.posteriors[0].alpha == (3.0, 1.0)
        assert model.posteriors[1].alpha == (2.0, 5.0)

    def test_explicit_prior_length_checked(self, period_corpus):
        with pytest.raises(ValidationError):
            fit_model(period_corpus, class_prior=ClassPrior((0.5, 0.5)))

    def test_empirical_over_records(self, period_corpus):
        model = fit_model(period_corpus, class_prior="empirical")
        assert model.prior.probs == (0.2,) * 5  # one pooled record per class

    def test_marginal_mean_consistency(self, period_model):
        # predictive of a single count must equal the marginal_beta mean
        for i in range(5):
            post = period_model.posteriors[i]
            for j in range(7):
                counts = tuple(1 if k == j else 0 for k in range(7))
                lp = log_predictive_likelihood(post, CountVector(counts))
                assert lp == pytest.approx(
                    math.log(marginal_beta(post, j).mean), abs=1e-12
                )
