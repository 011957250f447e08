#include <doctest.h>

#include <cmath>
#include <future>
#include <numeric>

#include "extsumm/errors.hpp"
#include "extsumm/model.hpp"
#include "fixtures.hpp"

using namespace extsumm;

namespace {

// Tiny helper: params with every tensor overwritten by zeros.
template <typename Real>
ModelParams<Real> zeroed_params(const ModelConfig& config) {
    auto p = init_params<Real>(config, 1);
    p.for_each_tensor([](std::string_view, std::span<Real> data) {
        for (auto& v : data) v = Real(0);
    });
    return p;
}

ModelConfig scalar_config() {
    ModelConfig config;
    config.dims.vocab = 3;
    config.dims.embed = 1;
    config.dims.hidden = 1;
    config.dims.context = 1;
    config.dims.topics = 1;
    config.dims.max_len = 4;
    config.dims.classifier = 1;
    return config;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("init_params is deterministic and validates shapes") {
    const auto config = testfix::tiny_model_config(20);
    const auto a = init_params<float>(config, 7);
    const auto b = init_params<float>(config, 7);
    bool identical = true;
    a.for_each_tensor([&](std::string_view name, std::span<const float> lhs) {
        b.for_each_tensor([&](std::string_view other, std::span<const float> rhs) {
            if (name != other) return;
            for (std::size_t i = 0; i < lhs.size(); ++i) identical = identical && lhs[i] == rhs[i];
        });
    });
    CHECK(identical);

    const auto c = init_params<float>(config, 8);
    CHECK(c.embed(2, 0) != a.embed(2, 0));

    SUBCASE("PAD row is zero, forget bias is one, other biases zero") {
        for (int j = 0; j < config.dims.embed; ++j) {
            CHECK(a.embed(Vocabulary::kPad, static_cast<std::size_t>(j)) == 0.0f);
        }
        for (const auto v : a.gate_b[kGateForget]) CHECK(v == 1.0f);
        for (const auto v : a.gate_b[kGateInput]) CHECK(v == 0.0f);
        for (const auto v : a.hidden_b) CHECK(v == 0.0f);
        CHECK(a.out_b == 0.0f);
    }

    SUBCASE("pretrained embeddings of the wrong shape are rejected") {
        EmbeddingMatrix wrong;
        wrong.vectors = Matrix<float>(5, static_cast<std::size_t>(config.dims.embed), 0.1f);
        CHECK_THROWS_AS(init_params<float>(config, 7, &wrong), ConfigError);
    }

    SUBCASE("pretrained embeddings are copied in, PAD row re-zeroed") {
        EmbeddingMatrix pre;
        pre.vectors = Matrix<float>(static_cast<std::size_t>(config.dims.vocab),
                                    static_cast<std::size_t>(config.dims.embed), 0.25f);
        const auto with = init_params<float>(config, 7, &pre);
        CHECK(with.embed(3, 0) == 0.25f);
        CHECK(with.embed(Vocabulary::kPad, 0) == 0.0f);
    }
}

TEST_CASE("xavier variance of the attention map matches 2/(fan_in+fan_out)") {
    ModelConfig config;
    config.dims.vocab = 4;
    config.dims.embed = 4;
    config.dims.hidden = 150;
    config.dims.context = 20;
    config.dims.topics = 3;
    config.dims.max_len = 60;
    config.dims.classifier = 4;
    const auto params = init_params<double>(config, 123);

    const double expected = 2.0 / ((150.0 + 20.0) + 60.0);
    double mean = 0.0, sq = 0.0;
    const auto& z = params.attention;
    for (const auto v : z.data()) {
        mean += v;
        sq += v * v;
    }
    const auto n = static_cast<double>(z.size());
    mean /= n;
    const double variance = sq / n - mean * mean;
    CHECK(variance == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("lstm_encode collapses to zero under all-zero weights") {
    auto params = zeroed_params<double>(testfix::tiny_model_config(10));
    const std::vector<std::int32_t> ids = {2, 3, 4};
    const auto enc = lstm_encode<double>(ids, params);
    for (const auto v : enc.sentence) CHECK(v == 0.0);
    for (const auto v : enc.outputs.data()) CHECK(v == 0.0);
}

TEST_CASE("scalar LSTM matches a hand-executed recurrence step") {
    auto params = zeroed_params<double>(scalar_config());
    params.embed(2, 0) = 0.7;
    params.gate_w[kGateInput](0, 0) = 0.5;
    params.gate_b[kGateInput][0] = 0.3;
    params.gate_w[kGateForget](0, 0) = -0.2;
    params.gate_b[kGateForget][0] = 1.0;
    params.gate_w[kGateCell](0, 0) = 0.9;
    params.gate_b[kGateCell][0] = -0.1;
    params.gate_w[kGateOutput](0, 0) = 0.4;
    params.gate_b[kGateOutput][0] = 0.2;

    const std::vector<std::int32_t> ids = {2};
    const auto enc = lstm_encode<double>(ids, params);

    const double x = 0.7;
    const double i = 1.0 / (1.0 + std::exp(-(0.5 * x + 0.3)));
    const double g = std::tanh(0.9 * x - 0.1);
    const double o = 1.0 / (1.0 + std::exp(-(0.4 * x + 0.2)));
    const double cell = i * g;
    const double expected = o * std::tanh(cell);
    CHECK(enc.sentence[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("padding contract: short sentences mask out, s is the last real state") {
    ModelConfig config = testfix::tiny_model_config(30);
    config.dims.max_len = 5;
    const auto params = init_params<double>(config, 5);

    const std::vector<std::int32_t> ids = {2, 7, 11};
    const auto enc = lstm_encode<double>(ids, params);
    CHECK(enc.mask == std::vector<std::uint8_t>{1, 1, 1, 0, 0});
    for (std::size_t l = 3; l < 5; ++l) {
        for (const auto v : enc.outputs.row(l)) CHECK(v == 0.0);
    }
    for (std::size_t u = 0; u < enc.sentence.size(); ++u) {
        CHECK(enc.sentence[u] == enc.outputs(2, u));
    }

    SUBCASE("over-length input is truncated to the first L tokens") {
        const std::vector<std::int32_t> long_ids = {2, 7, 11, 3, 4, 5, 6, 8};
        const std::vector<std::int32_t> first_five = {2, 7, 11, 3, 4};
        const auto full = lstm_encode<double>(long_ids, params);
        const auto capped = lstm_encode<double>(first_five, params);
        for (std::size_t u = 0; u < full.sentence.size(); ++u) {
            CHECK(full.sentence[u] == capped.sentence[u]);
        }
    }

    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(lstm_encode<double>(std::vector<std::int32_t>{}, params), DataError);
    }
}

TEST_CASE("context_embed selects, averages, and matches a naive loop") {
    Matrix<double> f(6, 4);
    Rng rng(17);
    for (auto& v : f.data()) v = rng.uniform() * 2.0 - 1.0;

    SUBCASE("one-hot p picks the matching row") {
        std::vector<double> p = {0, 0, 0, 1, 0, 0};
        const auto c = context_embed<double>(p, f);
        for (std::size_t j = 0; j < 4; ++j) CHECK(c[j] == doctest::Approx(f(3, j)));
    }
    SUBCASE("uniform over two topics averages the rows") {
        std::vector<double> p = {0.5, 0.5, 0, 0, 0, 0};
        const auto c = context_embed<double>(p, f);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(c[j] == doctest::Approx((f(0, j) + f(1, j)) / 2.0).epsilon(1e-12));
        }
    }
    SUBCASE("random p matches element-wise summation") {
        const auto p = testfix::random_topic_vector<double>(6, rng);
        const auto c = context_embed<double>(p, f);
        for (std::size_t j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (std::size_t m = 0; m < 6; ++m) acc += p[m] * f(m, j);
            CHECK(c[j] == doctest::Approx(acc).epsilon(1e-12));
        }
    }
    SUBCASE("permuting topics in p and F together leaves c unchanged") {
        const auto p = testfix::random_topic_vector<double>(6, rng);
        const auto c = context_embed<double>(p, f);

        const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
        std::vector<double> p2(6);
        Matrix<double> f2(6, 4);
        for (std::size_t m = 0; m < 6; ++m) {
            p2[m] = p[perm[m]];
            for (std::size_t j = 0; j < 4; ++j) f2(m, j) = f(perm[m], j);
        }
        const auto c2 = context_embed<double>(p2, f2);
        for (std::size_t j = 0; j < 4; ++j) CHECK(c2[j] == doctest::Approx(c[j]).epsilon(1e-12));
    }
    SUBCASE("NaN in p is an error") {
        std::vector<double> p = {0.5, std::nan(""), 0.5, 0, 0, 0};
        CHECK_THROWS_AS(context_embed<double>(p, f), NumericError);
    }
}

TEST_CASE("attention: degenerate and hand-checked cases") {
    const std::size_t U = 3, C = 2, L = 4;
    Rng rng(21);
    Matrix<double> y(L, U);
    for (auto& v : y.data()) v = rng.uniform() * 2.0 - 1.0;
    std::vector<double> s = {0.3, -0.2, 0.5};
    std::vector<double> c = {0.1, -0.4};
    Matrix<double> z(U + C, L);
    for (auto& v : z.data()) v = rng.uniform() * 2.0 - 1.0;

    SUBCASE("single real position forces w=[1,0,...] and a = Y[0] bit-exactly") {
        const std::vector<std::uint8_t> mask = {1, 0, 0, 0};
        const auto result = attention<double>(s, c, y, mask, z);
        CHECK(result.weights[0] == 1.0);
        for (std::size_t l = 1; l < L; ++l) CHECK(result.weights[l] == 0.0);
        for (std::size_t u = 0; u < U; ++u) CHECK(result.attended[u] == y(0, u));
    }

    SUBCASE("zero attention map gives uniform weights over real positions") {
        Matrix<double> z0(U + C, L, 0.0);
        const std::vector<std::uint8_t> mask = {1, 1, 1, 1};
        const auto result = attention<double>(s, c, y, mask, z0);
        for (std::size_t l = 0; l < L; ++l) {
            CHECK(result.weights[l] == doctest::Approx(0.25).epsilon(1e-12));
        }
        for (std::size_t u = 0; u < U; ++u) {
            const double mean = (y(0, u) + y(1, u) + y(2, u) + y(3, u)) / 4.0;
            CHECK(result.attended[u] == doctest::Approx(mean).epsilon(1e-12));
        }
    }

    SUBCASE("dense instance matches an independent naive computation") {
        const std::vector<std::uint8_t> mask = {1, 1, 1, 0};
        const auto result = attention<double>(s, c, y, mask, z);

        // Naive re-derivation.
        std::vector<double> q;
        q.insert(q.end(), s.begin(), s.end());
        q.insert(q.end(), c.begin(), c.end());
        std::vector<double> logits(L, 0.0);
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t r = 0; r < U + C; ++r) logits[l] += z(r, l) * q[r];
        }
        double denom = 0.0;
        std::vector<double> w(L, 0.0);
        for (std::size_t l = 0; l < 3; ++l) denom += std::exp(logits[l]);
        for (std::size_t l = 0; l < 3; ++l) w[l] = std::exp(logits[l]) / denom;
        for (std::size_t l = 0; l < L; ++l) {
            CHECK(result.weights[l] == doctest::Approx(w[l]).epsilon(1e-9));
        }
        for (std::size_t u = 0; u < U; ++u) {
            double acc = 0.0;
            for (std::size_t l = 0; l < 3; ++l) acc += w[l] * y(l, u);
            CHECK(result.attended[u] == doctest::Approx(acc).epsilon(1e-9));
        }

        double sum = 0.0;
        for (const auto v : result.weights) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(result.weights[3] == 0.0);
    }

    SUBCASE("all-masked input is an error") {
        const std::vector<std::uint8_t> mask = {0, 0, 0, 0};
        CHECK_THROWS_AS(attention<double>(s, c, y, mask, z), DataError);
    }

    SUBCASE("linear mode returns raw logits as weights") {
        const std::vector<std::uint8_t> mask = {1, 1, 0, 0};
        const auto result = attention<double>(s, c, y, mask, z, AttentionMode::kLinear);
        std::vector<double> q;
        q.insert(q.end(), s.begin(), s.end());
        q.insert(q.end(), c.begin(), c.end());
        for (std::size_t l = 0; l < 2; ++l) {
            double logit = 0.0;
            for (std::size_t r = 0; r < U + C; ++r) logit += z(r, l) * q[r];
            CHECK(result.weights[l] == doctest::Approx(logit).epsilon(1e-12));
        }
        CHECK(result.weights[2] == 0.0);
    }
}

TEST_CASE("masked softmax is shift invariant and exactly zero at masked slots") {
    const std::vector<double> logits = {0.3, -1.2, 2.0, 0.0, 5.0};
    const std::vector<std::uint8_t> mask = {1, 1, 0, 1, 0};
    const auto w = masked_softmax(std::span<const double>(logits),
                                  std::span<const std::uint8_t>(mask));
    std::vector<double> shifted = logits;
    for (auto& v : shifted) v += 37.5;
    const auto w2 = masked_softmax(std::span<const double>(shifted),
                                   std::span<const std::uint8_t>(mask));
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(w[i] == doctest::Approx(w2[i]).epsilon(1e-12));
        sum += w[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w[2] == 0.0);
    CHECK(w[4] == 0.0);
}

TEST_CASE("classify: sigmoid midpoint, monotonicity, 2x2 hand case") {
    ModelConfig config = scalar_config();
    config.dims.classifier = 2;
    auto params = zeroed_params<double>(config);

    const std::vector<double> a = {0.4};
    const std::vector<double> c = {-0.3};

    SUBCASE("zero output layer gives exactly 0.5") {
        CHECK(classify<double>(a, c, params) == 0.5);
    }

    SUBCASE("raising the pre-sigmoid output strictly raises o") {
        params.out_w = {0.7, -0.2};
        params.hidden_w(0, 0) = 0.5;
        params.hidden_w(1, 0) = -0.8;
        params.hidden_w(0, 1) = 0.1;
        params.hidden_w(1, 1) = 0.9;
        const double base = classify<double>(a, c, params);
        params.out_b = 0.5;
        const double shifted = classify<double>(a, c, params);
        CHECK(shifted > base);
    }

    SUBCASE("hand-set 2x2 case matches explicit arithmetic") {
        params.hidden_w(0, 0) = 0.5;
        params.hidden_w(1, 0) = -0.8;
        params.hidden_w(0, 1) = 0.1;
        params.hidden_w(1, 1) = 0.9;
        params.hidden_b = {0.05, -0.15};
        params.out_w = {0.7, -0.2};
        params.out_b = 0.3;

        const double h0 = std::tanh(0.5 * 0.4 + (-0.8) * (-0.3) + 0.05);
        const double h1 = std::tanh(0.1 * 0.4 + 0.9 * (-0.3) - 0.15);
        const double zeta = 0.7 * h0 - 0.2 * h1 + 0.3;
        const double expected = 1.0 / (1.0 + std::exp(-zeta));
        CHECK(classify<double>(a, c, params) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("forward: determinism, dropout semantics, bounds") {
    const auto config = testfix::tiny_model_config(25);
    const auto params = init_params<float>(config, 31);
    Rng topic_rng(5);
    const auto p = testfix::random_topic_vector<float>(config.dims.topics, topic_rng);
    const std::vector<std::int32_t> ids = {2, 9, 17, 4};

    SUBCASE("eval mode is pure: repeated calls agree bitwise") {
        const auto t1 = forward<float>(ids, p, params, RunMode::kEval, 0.0f, nullptr);
        const auto t2 = forward<float>(ids, p, params, RunMode::kEval, 0.0f, nullptr);
        CHECK(t1.output == t2.output);
        CHECK(t1.attn_weights == t2.attn_weights);
        CHECK(t1.output > 0.0f);
        CHECK(t1.output < 1.0f);
    }

    SUBCASE("train mode with dropout 0 equals eval mode") {
        Rng rng(77);
        const auto train = forward<float>(ids, p, params, RunMode::kTrain, 0.0f, &rng);
        const auto eval = forward<float>(ids, p, params, RunMode::kEval, 0.0f, nullptr);
        CHECK(train.output == eval.output);
    }

    SUBCASE("train mode is reproducible under a fixed rng seed") {
        Rng rng1(123), rng2(123);
        const auto t1 = forward<float>(ids, p, params, RunMode::kTrain, 0.3f, &rng1);
        const auto t2 = forward<float>(ids, p, params, RunMode::kTrain, 0.3f, &rng2);
        CHECK(t1.output == t2.output);
        CHECK(t1.dropout.input == t2.dropout.input);
        CHECK(t1.dropout.attended == t2.dropout.attended);
        CHECK(t1.dropout.hidden == t2.dropout.hidden);
    }

    SUBCASE("attention weights sum to one and vanish on padded slots") {
        const auto t = forward<float>(ids, p, params, RunMode::kEval, 0.0f, nullptr);
        float sum = 0.0f;
        for (std::size_t l = 0; l < t.attn_weights.size(); ++l) {
            CHECK(t.attn_weights[l] >= 0.0f);
            if (l >= static_cast<std::size_t>(t.true_len)) CHECK(t.attn_weights[l] == 0.0f);
            sum += t.attn_weights[l];
        }
        CHECK(sum == doctest::Approx(1.0f).epsilon(1e-6));
    }

    SUBCASE("eval forward is safe to run concurrently on shared params") {
        auto call = [&] {
            return forward<float>(ids, p, params, RunMode::kEval, 0.0f, nullptr).output;
        };
        auto f1 = std::async(std::launch::async, call);
        auto f2 = std::async(std::launch::async, call);
        auto f3 = std::async(std::launch::async, call);
        const float base = call();
        CHECK(f1.get() == base);
        CHECK(f2.get() == base);
        CHECK(f3.get() == base);
    }

    SUBCASE("topic vector of the wrong length is rejected") {
        const std::vector<float> bad = {1.0f};
        CHECK_THROWS_AS(forward<float>(ids, bad, params, RunMode::kEval, 0.0f, nullptr),
                        DataError);
    }
}

}  // TEST_SUITE
