#include "doctest.h"

#include "smoothcert/report.hpp"
#include "smoothcert/shiftmeter.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace smoothcert;

namespace {

// Affine net reproducing the exact effective noise for one fixed clean x:
// eps_hat(x_t) = (x_t - sqrt(abar_t) x) / sqrt(1 - abar_t), so the single-shot
// reconstruction is x itself. Valid only for the t baked into the weights.
Denoiser oracle_denoiser_for(const Tensor& x, std::size_t t, DiffusionSchedule s) {
    std::size_t d = x.size();
    double ab = s.alpha_bar[t - 1];
    Tensor w({d, d + 2});
    Tensor b({d});
    for (std::size_t i = 0; i < d; ++i) {
        w[i * (d + 2) + i] = 1.0 / std::sqrt(1.0 - ab);
        b[i] = -std::sqrt(ab) * x[i] / std::sqrt(1.0 - ab);
    }
    std::vector<Layer> layers{{std::move(w), std::move(b), Activation::kIdentity}};
    return Denoiser{FeedForwardNet(d, 2, std::move(layers)), std::move(s)};
}

Denoiser zero_denoiser(std::size_t d, DiffusionSchedule s) {
    std::vector<Layer> layers{{Tensor({d, d + 2}), Tensor({d}), Activation::kIdentity}};
    return Denoiser{FeedForwardNet(d, 2, std::move(layers)), std::move(s)};
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("shift_study: an oracle denoiser reports zero shift") {
    const std::size_t d = 4;
    auto s = build_schedule(40, 1e-3, 0.2);
    Tensor x = Tensor::vec({0.3, -0.5, 0.1, 0.8});
    LabeledDataset ds;
    ds.num_classes = 2;
    for (int i = 0; i < 5; ++i) {
        ds.inputs.push_back(x);
        ds.labels.push_back(0);
    }
    double sigma = 0.5;
    std::size_t t = select_tstar(sigma, s);
    auto den = oracle_denoiser_for(x, t, s);
    auto report = shift_study(ds, den, {sigma}, 5, 17);
    REQUIRE(report.blocks.size() == 1);
    CHECK(report.blocks[0].t_star == t);
    CHECK(report.blocks[0].mean <= 1e-10);
    for (const auto& pr : report.blocks[0].pairs) {
        CHECK(pr.l2_denoised <= 1e-10);
        CHECK(pr.l2_delta > 0.0);
    }
}

TEST_CASE("shift_study: a zero denoiser passes the raw noise straight through") {
    // With eps_hat = 0 under the certification-path noising, x_{0|t} = x + delta
    // exactly, so the denoised distance equals ||delta|| and its mean tracks
    // the chi-distribution value ~ sigma sqrt(d).
    const std::size_t d = 64;
    auto ds = gen_synthetic(125, 8, 8, 5);
    REQUIRE(ds.size() == 1000);
    auto s = build_schedule(100, 1e-3, 0.1);
    auto den = zero_denoiser(d, s);
    double sigma = 0.5;
    auto report = shift_study(ds, den, {sigma}, 1000, 23);
    const auto& block = report.blocks[0];
    for (const auto& pr : block.pairs) {
        CHECK(std::abs(pr.l2_denoised - pr.l2_delta) <= 1e-10);
    }
    CHECK(std::abs(block.mean - sigma * std::sqrt(double(d))) <= 0.05 * sigma * std::sqrt(double(d)));
    CHECK(block.stddev > 0.0);
    CHECK(block.count == 1000);
}

TEST_CASE("shift_study: trained denoiser degrades monotonically with sigma") {
    auto ds = gen_synthetic(12, 4, 8, 9);
    auto s = build_schedule(100, 1e-3, 0.1);
    DenoiserTrainConfig cfg;
    cfg.hidden = {64};
    cfg.epochs = 40;
    cfg.batch = 16;
    cfg.seed = 6;
    auto den = train_denoiser(ds, s, cfg).denoiser;
    auto report = shift_study(ds, den, {0.25, 0.5, 1.0}, 48, 31);
    REQUIRE(report.blocks.size() == 3);
    CHECK(report.blocks[0].mean <= report.blocks[1].mean);
    CHECK(report.blocks[1].mean <= report.blocks[2].mean);
    for (const auto& block : report.blocks) {
        CHECK(std::isfinite(block.mean));
        CHECK(block.mean >= 0.0);
        for (const auto& pr : block.pairs) {
            CHECK(pr.l2_denoised >= 0.0);
            CHECK(std::isfinite(pr.l2_denoised));
        }
    }
}

TEST_CASE("shift_study: identical output for any thread count") {
    auto ds = gen_synthetic(10, 2, 8, 13);
    auto s = build_schedule(50, 1e-3, 0.2);
    auto den = zero_denoiser(64, s);
    auto a = shift_study(ds, den, {0.25, 0.75}, 20, 44, 1);
    auto b = shift_study(ds, den, {0.25, 0.75}, 20, 44, 4);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t si = 0; si < a.blocks.size(); ++si) {
        CHECK(a.blocks[si].mean == b.blocks[si].mean);
        for (std::size_t i = 0; i < a.blocks[si].pairs.size(); ++i) {
            CHECK(a.blocks[si].pairs[i].index == i);
            CHECK(a.blocks[si].pairs[i].l2_delta == b.blocks[si].pairs[i].l2_delta);
            CHECK(a.blocks[si].pairs[i].l2_denoised == b.blocks[si].pairs[i].l2_denoised);
        }
    }
}

TEST_CASE("shift_study: rejects oversized sample requests") {
    auto ds = gen_synthetic(2, 2, 8, 1);
    auto den = zero_denoiser(64, build_schedule(10, 1e-3, 0.1));
    CHECK_THROWS_AS(shift_study(ds, den, {0.5}, 100, 1), std::domain_error);
}

TEST_CASE("write_shift_csv: stable header and one row per pair") {
    SigmaShiftBlock block;
    block.sigma = 0.5;
    block.pairs = {{0, 1.5, 0.25}, {1, 2.0, 0.5}};
    write_shift_csv(block, "t_shift.csv");
    std::string text = slurp("t_shift.csv");
    CHECK(text == "index,l2_delta,l2_denoised\n0,1.5,0.25\n1,2,0.5\n");
    std::remove("t_shift.csv");
}

TEST_CASE("write_pgm: exact bytes for a 2x2 image") {
    Tensor img = Tensor::vec({-1.0, 1.0, 0.0, 0.5});
    write_pgm(img, 2, "t_img.pgm");
    std::string bytes = slurp("t_img.pgm");
    std::string head = "P5\n2 2\n255\n";
    REQUIRE(bytes.size() == head.size() + 4);
    CHECK(bytes.compare(0, head.size(), head) == 0);
    CHECK(static_cast<unsigned char>(bytes[head.size() + 0]) == 0);
    CHECK(static_cast<unsigned char>(bytes[head.size() + 1]) == 255);
    CHECK(static_cast<unsigned char>(bytes[head.size() + 2]) == 128);  // round(127.5)
    CHECK(static_cast<unsigned char>(bytes[head.size() + 3]) == 191);  // round(191.25)
    std::remove("t_img.pgm");

    CHECK_THROWS_AS(write_pgm(img, 3, "t_img2.pgm"), ShapeError);
}
