#include "doctest.h"

#include "smoothcert/report.hpp"
#include "smoothcert/smoothing.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace smoothcert;

namespace {

// 1-D two-class pipeline: class 1 iff x + delta > theta, so the noisy class-1
// probability is exactly Phi((x - theta) / sigma).
SmoothedPipeline threshold_pipeline(double theta, double sigma) {
    std::vector<Layer> layers{{Tensor::matrix(2, 1, {-1.0, 1.0}), Tensor::vec({theta, -theta}),
                               Activation::kIdentity}};
    Classifier clf{FeedForwardNet(1, 0, std::move(layers))};
    return SmoothedPipeline::make(std::move(clf), std::nullopt, sigma);
}

SmoothedPipeline constant_pipeline(std::size_t d, std::size_t C, double sigma) {
    std::vector<Layer> layers{{Tensor({C, d}), Tensor({C}), Activation::kIdentity}};
    Classifier clf{FeedForwardNet(d, 0, std::move(layers))};
    return SmoothedPipeline::make(std::move(clf), std::nullopt, sigma);
}

LabeledDataset scalar_dataset(const std::vector<double>& xs, const std::vector<int>& ys) {
    LabeledDataset ds;
    ds.num_classes = 2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ds.inputs.push_back(Tensor::vec({xs[i]}));
        ds.labels.push_back(ys[i]);
    }
    return ds;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sample_under_noise: vanishing sigma concentrates on the base prediction") {
    auto p = threshold_pipeline(0.0, 1e-9);
    Tensor x = Tensor::vec({0.5});
    int base = predict_base(p.classifier, x);
    auto counts = sample_under_noise(p, x, 500, Rng{3, 1, 0});
    CHECK(counts[std::size_t(base)] == 500);
}

TEST_CASE("sample_under_noise: constant classifier puts all mass on class 0") {
    auto p = constant_pipeline(4, 3, 0.5);
    auto counts = sample_under_noise(p, Tensor::vec({0.1, 0.2, 0.3, 0.4}), 321, Rng{5, 2, 0});
    CHECK(counts[0] == 321);
    CHECK(counts[1] == 0);
    CHECK(counts[2] == 0);
}

TEST_CASE("sample_under_noise: counts are identical across thread partitions") {
    auto p = threshold_pipeline(0.25, 0.7);
    Tensor x = Tensor::vec({0.4});
    Rng rng{99, 12, 0};
    auto c1 = sample_under_noise(p, x, 4096, rng, 17, 1);
    auto c4 = sample_under_noise(p, x, 4096, rng, 17, 4);
    auto c8 = sample_under_noise(p, x, 4096, rng, 17, 8);
    CHECK(c1 == c4);
    CHECK(c1 == c8);
    CHECK(c1[0] + c1[1] == 4096);
}

TEST_CASE("sample_under_noise: empirical rate tracks the analytic probability") {
    // p = Phi((x - theta) / sigma) = Phi(1) ~ 0.8413
    auto p = threshold_pipeline(-0.5, 0.5);
    auto counts = sample_under_noise(p, Tensor::vec({0.0}), 20000, Rng{71, 0, 0});
    double rate = double(counts[1]) / 20000.0;
    CHECK(std::abs(rate - std_normal_cdf(1.0)) <= 0.01);
}

TEST_CASE("predict_smoothed: lopsided votes clear the binomial test") {
    auto p = threshold_pipeline(0.0, 1.0);  // x = 2.33 -> p ~ 0.99
    CertifyParams params;
    params.n = 1000;
    params.alpha = 0.001;
    CHECK(predict_smoothed(p, Tensor::vec({2.33}), params, Rng{1, 0, 0}) == 1);
}

TEST_CASE("predict_smoothed: a coin-flip vote abstains") {
    auto p = threshold_pipeline(0.0, 1.0);  // x = 0 -> p = 0.5 exactly
    CertifyParams params;
    params.n = 1000;
    params.alpha = 0.001;
    CHECK(predict_smoothed(p, Tensor::vec({0.0}), params, Rng{2, 0, 0}) == kAbstain);
}

TEST_CASE("predict_smoothed: a modest majority abstains at alpha = 0.001") {
    // p ~ 0.55 with n = 100 needs about a 67/33 split to clear alpha.
    auto p = threshold_pipeline(0.0, 1.0);
    CertifyParams params;
    params.n = 100;
    params.alpha = 0.001;
    CHECK(predict_smoothed(p, Tensor::vec({std_normal_quantile(0.55)}), params, Rng{3, 0, 0}) ==
          kAbstain);
}

TEST_CASE("certify: sub-majority lower bound abstains") {
    auto p = threshold_pipeline(0.0, 1.0);  // x = 0 -> both classes at 0.5
    CertifyParams params;
    params.n0 = 100;
    params.n = 1000;
    params.alpha = 0.001;
    auto outcome = certify(p, Tensor::vec({0.0}), params, Rng{4, 0, 0});
    CHECK(outcome.prediction == kAbstain);
    CHECK(outcome.radius == 0.0);
}

TEST_CASE("certify: unanimous vote hits the closed-form k=n radius") {
    auto p = constant_pipeline(2, 2, 0.5);
    CertifyParams params;
    params.n0 = 100;
    params.n = 10000;
    params.alpha = 0.001;
    auto outcome = certify(p, Tensor::vec({0.0, 0.0}), params, Rng{5, 0, 0});
    CHECK(outcome.prediction == 0);
    double expect = 0.5 * std_normal_quantile(std::pow(0.001, 1.0 / 10000.0));
    CHECK(outcome.radius == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("certify: invalid sampling plans are rejected") {
    auto p = constant_pipeline(1, 2, 0.5);
    CertifyParams params;
    params.n0 = 0;
    CHECK_THROWS_AS(certify(p, Tensor::vec({0.0}), params, Rng{1, 0, 0}), std::domain_error);
    params.n0 = 200;
    params.n = 100;
    CHECK_THROWS_AS(certify(p, Tensor::vec({0.0}), params, Rng{1, 0, 0}), std::domain_error);
}

TEST_CASE("certified_radius_theorem: two-class identity and scaling") {
    for (double pa : {0.6, 0.75, 0.9, 0.99}) {
        double r = certified_radius_theorem(pa, 1.0 - pa, 0.7);
        CHECK(std::abs(r - 0.7 * std_normal_quantile(pa)) <= 1e-12);
        CHECK(certified_radius_theorem(pa, 1.0 - pa, 1.4) == doctest::Approx(2.0 * r).epsilon(1e-12));
    }
    CHECK(certified_radius_theorem(0.99, 0.01, 1.0) == doctest::Approx(2.3263478740).epsilon(1e-8));
    CHECK(certified_radius_theorem(0.500001, 0.499999, 1.0) > 0.0);
    CHECK(certified_radius_theorem(0.500001, 0.499999, 1.0) < 1e-4);
    CHECK_THROWS_AS(certified_radius_theorem(0.4, 0.6, 1.0), std::domain_error);
}

TEST_CASE("certified radius is nondecreasing in the top-class count") {
    const std::size_t n = 1000;
    const double alpha = 0.001, sigma = 0.5;
    double prev = 0.0;
    for (std::uint64_t k = 600; k <= n; k += 20) {
        double p_lower = clopper_pearson_lower(k, n, alpha);
        if (p_lower <= 0.5) continue;
        double r = sigma * std_normal_quantile(p_lower);
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(prev > 0.0);
}

TEST_CASE("evaluate_certification: mixed dataset, ACR and grid by hand") {
    // Labels 1 at x = +-2.33 under the theta=0 pipeline: the sample at +2.33
    // certifies class 1 correctly, the sample at -2.33 certifies class 0,
    // which is wrong for its label and must contribute zero.
    auto p = threshold_pipeline(0.0, 1.0);
    auto ds = scalar_dataset({2.33, -2.33}, {1, 1});
    CertifyParams params;
    params.n0 = 100;
    params.n = 2000;
    params.alpha = 0.001;
    auto report = evaluate_certification(p, ds, params);
    REQUIRE(report.records.size() == 2);
    CHECK(report.records[0].prediction == 1);
    CHECK(report.records[1].prediction == 0);
    CHECK(report.records[0].radius > 0.0);
    CHECK(report.acr == doctest::Approx(0.5 * report.records[0].radius).epsilon(1e-12));
    for (std::size_t k = 0; k < report.radii.size(); ++k) {
        double want = report.records[0].radius > report.radii[k] ? 0.5 : 0.0;
        CHECK(report.certified_accuracy[k] == want);
    }
}

TEST_CASE("evaluate_certification: identical output for any thread count") {
    auto p = threshold_pipeline(0.1, 0.8);
    auto ds = scalar_dataset({1.5, -1.5, 2.0, 0.0, 0.9, -0.4}, {1, 0, 1, 0, 1, 0});
    CertifyParams params;
    params.n0 = 50;
    params.n = 500;
    params.alpha = 0.001;
    auto a = evaluate_certification(p, ds, params, default_radius_grid(), 1);
    auto b = evaluate_certification(p, ds, params, default_radius_grid(), 3);
    auto c = evaluate_certification(p, ds, params, default_radius_grid(), 8);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].prediction == b.records[i].prediction);
        CHECK(a.records[i].radius == b.records[i].radius);
        CHECK(a.records[i].prediction == c.records[i].prediction);
        CHECK(a.records[i].radius == c.records[i].radius);
    }
    CHECK(a.acr == b.acr);
    CHECK(a.acr == c.acr);
}

TEST_CASE("summarize_records: hand ACR cases") {
    std::vector<CertificationRecord> recs;
    recs.push_back({0, 1, 1, 1.2, 0.0});   // correct, r = 1.2
    recs.push_back({1, 0, 1, 5.0, 0.0});   // wrong class
    auto rep = summarize_records(recs);
    CHECK(rep.acr == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(rep.certified_accuracy[0] == 0.5);  // r > 0.0
    CHECK(rep.certified_accuracy[4] == 0.5);  // r > 1.0
    CHECK(rep.certified_accuracy[5] == 0.0);  // r > 1.25

    std::vector<CertificationRecord> abstains;
    abstains.push_back({0, 1, kAbstain, 0.0, 0.0});
    abstains.push_back({1, 0, kAbstain, 0.0, 0.0});
    auto rep2 = summarize_records(abstains);
    CHECK(rep2.acr == 0.0);
    for (double v : rep2.certified_accuracy) CHECK(v == 0.0);
}

TEST_CASE("certification CSV round-trips and is byte-stable") {
    std::vector<CertificationRecord> recs;
    recs.push_back({0, 1, 1, 1.25, 0.031});
    recs.push_back({1, 0, kAbstain, 0.0, 0.044});
    recs.push_back({2, 2, 1, 0.5, 0.09});
    auto rep = summarize_records(recs);

    write_certification_csv(rep, "t_cert_a.csv");
    write_certification_csv(rep, "t_cert_b.csv");
    CHECK(slurp("t_cert_a.csv") == slurp("t_cert_b.csv"));

    auto back = read_certification_csv("t_cert_a.csv");
    REQUIRE(back.size() == 3);
    CHECK(back[0].label == 1);
    CHECK(back[0].prediction == 1);
    CHECK(back[0].radius == 1.25);
    CHECK(back[0].seconds == 0.0);  // timings zeroed by default
    CHECK(back[1].prediction == kAbstain);
    CHECK(back[1].radius == 0.0);
    auto resum = summarize_records(back);
    CHECK(std::abs(resum.acr - rep.acr) <= 1e-12);

    write_certification_csv(rep, "t_cert_c.csv", /*include_timings=*/true);
    auto timed = read_certification_csv("t_cert_c.csv");
    CHECK(timed[0].seconds == doctest::Approx(0.031).epsilon(1e-12));

    write_timing_log(rep, "t_cert_t.csv");
    std::string log = slurp("t_cert_t.csv");
    CHECK(log.rfind("index,seconds\n", 0) == 0);

    std::remove("t_cert_a.csv");
    std::remove("t_cert_b.csv");
    std::remove("t_cert_c.csv");
    std::remove("t_cert_t.csv");
}

TEST_CASE("SmoothedPipeline: sigma must be positive") {
    std::vector<Layer> layers{{Tensor({2, 1}), Tensor({2}), Activation::kIdentity}};
    Classifier clf{FeedForwardNet(1, 0, std::move(layers))};
    CHECK_THROWS_AS(SmoothedPipeline::make(std::move(clf), std::nullopt, 0.0), std::domain_error);
}
