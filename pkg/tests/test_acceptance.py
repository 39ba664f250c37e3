"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its runtime.  Tolerances are pinned here and nowhere
else; run with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from sourcescope.diagnostics import (
    ConfusionMatrix,
    log_likelihood_from_aic,
    lr_test,
    mcfadden,
    mcfadden_adjusted,
)
from sourcescope.features import (
    FeatureVector,
    FetchPolicy,
    extract_features,
    get_fetch_counters,
    reset_fetch_counters,
)
from sourcescope.model import (
    MODEL_II,
    LabeledDataset,
    LogitModel,
    fit_logit,
    log_likelihood,
    predict_probability,
)
from sourcescope.pipeline import ScoreRequest, score_url
from sourcescope.screener import default_known_domains
from sourcescope.stats import (
    ContingencyTable2x2,
    bivariate_normal_cdf,
    chi_square_sf,
    chi_square_test,
    normal_cdf,
    tetrachoric,
)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def report(number: int, name: str, timer: Timer, budget: float):
    print(f"[acceptance] criterion {number} ({name}): PASS in {timer.elapsed * 1e3:.3f} ms")
    assert timer.elapsed < budget, (
        f"criterion {number} exceeded its {budget * 1e3:.0f} ms budget")


ALL_ZEROS = FeatureVector(padlock=0, contact=0, telephone=0, about=0, terms=0)
ALL_ONES = FeatureVector(padlock=1, contact=1, telephone=1, about=1, terms=1)


def test_criterion_1_reference_scoring():
    predict_probability(MODEL_II, ALL_ZEROS)  # warm-up outside the clock
    with Timer() as t:
        p_zeros = predict_probability(MODEL_II, ALL_ZEROS)
        p_ones = predict_probability(MODEL_II, ALL_ONES)
    assert abs(p_zeros - 0.9790) < 1e-3
    assert abs(p_ones - 0.0564) < 1e-3
    report(1, "reference model scoring", t, 0.001)


def test_criterion_2_fit_statistic_identities():
    lnl0 = 400 * math.log(0.5)
    with Timer() as t:
        lnl_4 = log_likelihood_from_aic(306.1254, 5)
        m4 = mcfadden(lnl_4, lnl0)
        a4 = mcfadden_adjusted(lnl_4, lnl0, 5)
        lr4, _ = lr_test(lnl_4, lnl0, 4)
        lnl_5 = log_likelihood_from_aic(306.9277, 6)
        m5 = mcfadden(lnl_5, lnl0)
        a5 = mcfadden_adjusted(lnl_5, lnl0, 6)
        lr5, _ = lr_test(lnl_5, lnl0, 5)
    assert abs(lnl0 - (-277.2589)) < 1e-3
    assert abs(lnl_4 - (-148.0627)) < 1e-6
    assert abs(m4 - 0.4660) < 5e-4
    assert abs(a4 - 0.4479) < 5e-4
    assert abs(lr4 - 258.392) < 5e-3
    assert abs(m5 - 0.4681) < 5e-4
    assert abs(a5 - 0.4465) < 5e-4
    assert abs(lr5 - 259.59) < 5e-3
    report(2, "fit-statistic identities", t, 0.001)


def test_criterion_3_confusion_identity():
    with Timer() as t:
        cm = ConfusionMatrix(166, 34, 29, 171, cutoff=0.5)
        accuracy = cm.accuracy
        shares = cm.cell_shares()
    assert abs(accuracy - 0.8425) < 1e-12
    assert shares == (41.5, 8.5, 7.3, 42.7)
    report(3, "confusion-matrix identity", t, 0.001)


def _two_by_two_dataset():
    rows = []
    rows += [(FeatureVector(padlock=1, contact=0, telephone=0, about=0, terms=0), 1)] * 30
    rows += [(FeatureVector(padlock=1, contact=0, telephone=0, about=0, terms=0), 0)] * 10
    rows += [(FeatureVector(padlock=0, contact=0, telephone=0, about=0, terms=0), 1)] * 10
    rows += [(FeatureVector(padlock=0, contact=0, telephone=0, about=0, terms=0), 0)] * 30
    return LabeledDataset(tuple(rows))


def test_criterion_4_mle_oracle():
    rng = np.random.default_rng(2718)
    with Timer() as t:
        fit = fit_logit(_two_by_two_dataset(), ("padlock",))
        assert abs(fit.model.intercept - math.log(10 / 30)) < 1e-4
        assert abs(fit.model.coefficients["padlock"] - math.log(9.0)) < 1e-4

        X = np.column_stack([np.ones(80),
                             _two_by_two_dataset().feature_matrix(("padlock",))])
        beta_hat = np.array([fit.model.intercept, fit.model.coefficients["padlock"]])
        p = 1.0 / (1.0 + np.exp(-X @ beta_hat))
        score = X.T @ (_two_by_two_dataset().labels() - p)
        assert np.max(np.abs(score)) < 1e-8

        # analytic score vs central differences on 20 random small problems
        names_all = ("padlock", "contact", "telephone", "about", "terms")
        step = 1e-5
        for _ in range(20):
            k = int(rng.integers(1, 4))
            names = tuple(rng.choice(names_all, size=k, replace=False))
            n = int(rng.integers(40, 100))
            rows = []
            for _ in range(n):
                bits = {nm: int(rng.integers(0, 2)) for nm in names_all}
                rows.append((FeatureVector(**bits), int(rng.integers(0, 2))))
            data = LabeledDataset(tuple(rows))
            beta = rng.normal(0, 1, size=k + 1)
            Xd = np.column_stack([np.ones(n), data.feature_matrix(names)])
            pd = 1.0 / (1.0 + np.exp(-Xd @ beta))
            analytic = Xd.T @ (data.labels() - pd)

            def lnl_at(b):
                model = LogitModel(intercept=b[0], coefficients=dict(zip(names, b[1:])))
                return log_likelihood(model, data)

            scale = max(1.0, float(np.max(np.abs(analytic))))
            for j in range(k + 1):
                up, down = beta.copy(), beta.copy()
                up[j] += step
                down[j] -= step
                numeric = (lnl_at(up) - lnl_at(down)) / (2 * step)
                assert abs(numeric - analytic[j]) < 1e-6 * scale
    report(4, "maximum-likelihood oracle", t, 1.0)


def test_criterion_5_parameter_recovery():
    rng = np.random.default_rng(20240810)
    names = tuple(MODEL_II.coefficients)
    truth = np.array(list(MODEL_II.coefficients.values()))
    n = 10_000
    with Timer() as t:
        successes = 0
        for _ in range(50):
            X = rng.integers(0, 2, size=(n, 4)).astype(float)
            z = MODEL_II.intercept + X @ truth
            y = (rng.random(n) < 1.0 / (1.0 + np.exp(-z))).astype(int)
            rows = tuple(
                (FeatureVector(about=0, **dict(zip(names, map(int, X[i])))), int(y[i]))
                for i in range(n))
            fit = fit_logit(LabeledDataset(rows), names)
            recovered = np.array([fit.model.coefficients[nm] for nm in names])
            if np.all(np.abs(recovered - truth) <= 0.15):
                successes += 1
    assert successes >= 48, f"only {successes}/50 runs recovered all coefficients"
    print(f"[acceptance] criterion 5 recovery rate: {successes}/50")
    report(5, "coefficient recovery", t, 30.0)


def test_criterion_6_tetrachoric_oracle():
    with Timer() as t:
        assert abs(tetrachoric(ContingencyTable2x2(50, 50, 50, 50)).rho) < 1e-6
        assert abs(tetrachoric(ContingencyTable2x2(40, 10, 10, 40)).rho - 0.80902) < 1e-4

        n = 10_000
        for share in np.arange(0.26, 0.495, 0.01):
            n11 = round(share * n)
            n10 = n // 2 - n11
            expected = math.sin(2.0 * math.pi * (n11 / n - 0.25))
            got = tetrachoric(ContingencyTable2x2(n11, n10, n10, n11)).rho
            assert abs(got - expected) < 1e-4

        for counts in ((40, 10, 10, 40), (70, 20, 35, 75), (12, 30, 44, 14)):
            n11, n10, n01, n00 = counts
            direct = tetrachoric(ContingencyTable2x2(n11, n10, n01, n00)).rho
            flipped = tetrachoric(ContingencyTable2x2(n10, n11, n00, n01)).rho
            assert abs(direct + flipped) < 1e-6
    report(6, "latent-correlation oracle", t, 5.0)


def test_criterion_7_bivariate_normal():
    rng = np.random.default_rng(99)
    with Timer() as t:
        assert abs(bivariate_normal_cdf(0.0, 0.0, 0.5) - 1.0 / 3.0) < 1e-7
        for _ in range(100):
            h, k = rng.uniform(-4, 4, size=2)
            expected = normal_cdf(h) * normal_cdf(k)
            assert abs(bivariate_normal_cdf(h, k, 0.0) - expected) < 1e-9
    report(7, "bivariate-normal closed forms", t, 1.0)


def test_criterion_8_chi_square():
    with Timer() as t:
        result = chi_square_test(ContingencyTable2x2(90, 10, 30, 70))
        assert result.statistic == 75.0

        for df in range(1, 11):
            norm = 2.0 ** (df / 2.0) * math.gamma(df / 2.0)

            def density(u, df=df, norm=norm):
                return u ** (df / 2.0 - 1.0) * math.exp(-u / 2.0) / norm

            for x in (0.5, 2.0, 8.0, 20.0, 50.0):
                oracle, err = integrate.quad(density, x, 400.0, limit=300)
                assert err < 1e-7
                assert abs(chi_square_sf(x, df) - oracle) < 1e-8

        assert not chi_square_test(ContingencyTable2x2(2, 3, 4, 1)).expected_frequency_assumption_met
    report(8, "chi-square test", t, 5.0)


def test_criterion_9_recognition_flow(fixture_sites):
    db = default_known_domains()
    policy = FetchPolicy(offline_root=fixture_sites)
    with Timer() as t:
        reset_fetch_counters()
        mimic = score_url(ScoreRequest("http://nbcnews.com.co", threshold=0.5,
                                       policy=policy), MODEL_II, db)
        assert mimic.probability_fake == 1.0
        assert mimic.verdict == "withhold"
        counters = get_fetch_counters()
        assert counters.snapshots == 0 and counters.http_requests == 0

        bare = score_url(ScoreRequest("http://en-bare.test", threshold=0.5,
                                      policy=policy), MODEL_II, db)
        assert abs(bare.probability_fake - 0.9790) < 1e-3
        full = score_url(ScoreRequest("https://en-full.test", threshold=0.5,
                                      policy=policy), MODEL_II, db)
        assert abs(full.probability_fake - 0.0564) < 1e-3

        for url in ("http://en-bare.test", "https://en-full.test",
                    "http://es-sections.test"):
            shared = []
            for threshold in np.linspace(0.0, 1.0, 11):
                verdict = score_url(ScoreRequest(url, threshold=float(threshold),
                                                 policy=policy), MODEL_II, db).verdict
                shared.append(verdict == "share")
            assert shared == sorted(shared), f"verdict not monotone in T for {url}"
    report(9, "recognition flow", t, 5.0)


def test_criterion_10_extraction_corpus(corpus, fixture_sites):
    assert len(corpus) >= 12
    policy = FetchPolicy(offline_root=fixture_sites)
    with Timer() as t:
        errors = []
        for name, spec in corpus.items():
            got = extract_features(spec["url"], policy).as_dict()
            if got != spec["expected"]:
                errors.append((name, spec["expected"], got))
    assert not errors, f"bit errors on fixtures: {errors}"
    print(f"[acceptance] criterion 10 corpus size: {len(corpus)} sites, 0 bit errors")
    report(10, "feature-extraction corpus", t, 5.0)
