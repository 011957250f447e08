#include <doctest.h>

#include <cmath>

#include "extsumm/checkpoint.hpp"
#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "extsumm/trainer.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"

using namespace extsumm;

namespace {

std::vector<std::int32_t> random_sentence(Rng& rng, std::int32_t vocab, int min_len, int max_len) {
    const int n = min_len + static_cast<int>(rng.below(
                                static_cast<std::uint32_t>(max_len - min_len + 1)));
    std::vector<std::int32_t> ids;
    for (int i = 0; i < n; ++i) {
        ids.push_back(2 + static_cast<std::int32_t>(rng.below(
                              static_cast<std::uint32_t>(vocab - 2))));
    }
    return ids;
}

// Hand-built dataset with a separable signal: positives use one token block,
// negatives another.
LabeledDataset separable_dataset(int per_class, int topics, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset dataset;
    dataset.doc_topics["a"] = std::vector<double>(static_cast<std::size_t>(topics),
                                                  1.0 / static_cast<double>(topics));
    for (int i = 0; i < per_class; ++i) {
        LabeledExample pos;
        pos.doc_id = "a";
        pos.sentence_index = 2 * i;
        pos.label = 1;
        for (int t = 0; t < 5; ++t) pos.token_ids.push_back(2 + static_cast<std::int32_t>(rng.below(4)));
        dataset.examples.push_back(pos);

        LabeledExample neg;
        neg.doc_id = "a";
        neg.sentence_index = 2 * i + 1;
        neg.label = 0;
        for (int t = 0; t < 5; ++t) neg.token_ids.push_back(8 + static_cast<std::int32_t>(rng.below(4)));
        dataset.examples.push_back(neg);
    }
    dataset.stats.positives = per_class;
    dataset.stats.negatives = per_class;
    return dataset;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("weighted_bce hand values") {
    CHECK(weighted_bce(1.0 - 1e-7, 1, 0.8, 0.2) < 1e-6);
    CHECK(weighted_bce(0.5, 1, 0.8, 0.2) ==
          doctest::Approx(0.8 * std::log(2.0)).epsilon(1e-12));
    CHECK(weighted_bce(0.5, 1, 0.8, 0.2) == doctest::Approx(0.55452).epsilon(1e-4));
    CHECK(weighted_bce(0.5, 0, 0.8, 0.2) ==
          doctest::Approx(0.2 * std::log(2.0)).epsilon(1e-12));
    CHECK(weighted_bce(0.5, 0, 0.8, 0.2) == doctest::Approx(0.13863).epsilon(1e-4));
    // Clamping keeps extreme predictions finite.
    CHECK(std::isfinite(weighted_bce(0.0, 1, 0.8, 0.2)));
    CHECK(std::isfinite(weighted_bce(1.0, 0, 0.8, 0.2)));
}

TEST_CASE("weighted loss reduces to plain BCE at unit weights") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double o = 0.001 + 0.998 * rng.uniform();
        const int y = rng.uniform() < 0.5 ? 0 : 1;
        const double plain = -(y * std::log(o) + (1 - y) * std::log(1.0 - o));
        CHECK(weighted_bce(o, y, 1.0, 1.0) == doctest::Approx(plain).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    const auto config = testfix::tiny_model_config(30);
    Rng rng(42);
    double worst = 0.0;
    for (int instance = 0; instance < 8; ++instance) {
        const auto params =
            init_params<double>(config, derive_seed(1000, std::to_string(instance)));
        const auto ids = random_sentence(rng, config.dims.vocab, 2, config.dims.max_len + 2);
        const auto p = testfix::random_topic_vector<double>(config.dims.topics, rng);
        const int label = instance % 2;
        const auto report =
            testfix::finite_difference_check(params, ids, p, label, 0.8, 0.2, 1e-5);
        CAPTURE(instance);
        CAPTURE(report.worst_tensor);
        CHECK(report.max_rel_err < 1e-4);
        worst = std::max(worst, report.max_rel_err);
    }
    MESSAGE("max relative error over instances: ", worst);
}

TEST_CASE("gradients stay exact through recorded dropout masks") {
    const auto config = testfix::tiny_model_config(30);
    Rng rng(77);
    for (int instance = 0; instance < 3; ++instance) {
        const auto params =
            init_params<double>(config, derive_seed(2000, std::to_string(instance)));
        const auto ids = random_sentence(rng, config.dims.vocab, 3, config.dims.max_len);
        const auto p = testfix::random_topic_vector<double>(config.dims.topics, rng);

        // Record masks from a live train-mode pass, then replay them.
        Rng dropout_rng(derive_seed(31, std::to_string(instance)));
        const auto live = forward<double>(ids, p, params, RunMode::kTrain, 0.4, &dropout_rng);
        const auto report = testfix::finite_difference_check(params, ids, p, 1, 0.8, 0.2, 1e-5,
                                                             &live.dropout, 0.4);
        CAPTURE(report.worst_tensor);
        CHECK(report.max_rel_err < 1e-4);
    }
}

TEST_CASE("gradient structure: output bias and embedding sparsity") {
    const auto config = testfix::tiny_model_config(30);
    auto params = init_params<double>(config, 5);
    Rng rng(3);
    const std::vector<std::int32_t> ids = {2, 5, 9};
    const auto p = testfix::random_topic_vector<double>(config.dims.topics, rng);

    const auto trace = forward<double>(ids, p, params, RunMode::kEval, 0.0, nullptr);
    const auto grads = backward<double>(trace, 1, params, 0.8, 0.2);

    SUBCASE("d(loss)/d(b_O) is pw*(o-1) for a positive label, vanishing as o -> 1") {
        CHECK(grads.out_b == doctest::Approx(0.8 * (trace.output - 1.0)).epsilon(1e-12));

        auto confident = params;
        confident.out_b = 25.0;  // saturates o toward 1
        const auto t2 = forward<double>(ids, p, confident, RunMode::kEval, 0.0, nullptr);
        const auto g2 = backward<double>(t2, 1, confident, 0.8, 0.2);
        CHECK(std::abs(g2.out_b) < 1e-6);
    }

    SUBCASE("embedding rows of absent tokens get zero gradient") {
        for (std::int32_t id = 0; id < config.dims.vocab; ++id) {
            const bool present = id == 2 || id == 5 || id == 9;
            double norm = 0.0;
            for (int j = 0; j < config.dims.embed; ++j) {
                norm += std::abs(grads.embed(static_cast<std::size_t>(id),
                                             static_cast<std::size_t>(j)));
            }
            if (present) {
                CHECK(norm > 0.0);
            } else {
                CHECK(norm == 0.0);
            }
        }
    }

    SUBCASE("PAD row gradient is forced to zero") {
        for (int j = 0; j < config.dims.embed; ++j) {
            CHECK(grads.embed(Vocabulary::kPad, static_cast<std::size_t>(j)) == 0.0);
        }
    }
}

TEST_CASE("adam_step: fixed point, first step, and error handling") {
    const auto config = testfix::tiny_model_config(12);
    auto params = init_params<double>(config, 9);
    auto state = AdamState<double>::init(params);
    TrainConfig tc;
    tc.lr = 0.001;

    SUBCASE("zero gradients leave parameters and moments untouched") {
        const auto before = params;
        adam_step(params, params.zeros_like(), state, tc);
        bool unchanged = true;
        params.for_each_tensor([&](std::string_view name, std::span<const double> now) {
            before.for_each_tensor([&](std::string_view other, std::span<const double> then) {
                if (name != other) return;
                for (std::size_t i = 0; i < now.size(); ++i) {
                    unchanged = unchanged && now[i] == then[i];
                }
            });
        });
        CHECK(unchanged);
        CHECK(state.t == 1);
    }

    SUBCASE("first step moves each coordinate by about -lr * sign(g)") {
        auto grads = params.zeros_like();
        Rng rng(15);
        grads.for_each_tensor([&](std::string_view, std::span<double> data) {
            for (auto& v : data) v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.2 + rng.uniform());
        });
        const auto before = params;
        adam_step(params, grads, state, tc);

        std::vector<std::span<const double>> b, a, g;
        before.for_each_tensor([&](std::string_view, std::span<const double> d) { b.push_back(d); });
        params.for_each_tensor([&](std::string_view, std::span<const double> d) { a.push_back(d); });
        grads.for_each_tensor([&](std::string_view, std::span<const double> d) { g.push_back(d); });
        for (std::size_t t = 0; t < b.size(); ++t) {
            for (std::size_t i = 0; i < b[t].size(); ++i) {
                // Skip the PAD embedding row, which never moves.
                const double delta = a[t][i] - b[t][i];
                if (t == 0 && i < static_cast<std::size_t>(config.dims.embed)) {
                    CHECK(delta == 0.0);
                    continue;
                }
                const double expected = -tc.lr * (g[t][i] > 0 ? 1.0 : -1.0);
                CHECK(delta == doctest::Approx(expected).epsilon(1e-6));
            }
        }
    }

    SUBCASE("non-finite gradients are rejected") {
        auto grads = params.zeros_like();
        grads.out_b = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(adam_step(params, grads, state, tc), NumericError);
    }
}

TEST_CASE("a small-lr Adam step does not increase the batch loss") {
    const auto config = testfix::tiny_model_config(20);
    Rng rng(55);
    TrainConfig tc;
    tc.lr = 1e-4;

    int checked = 0;
    for (int instance = 0; instance < 50; ++instance) {
        auto params = init_params<double>(config, derive_seed(3000, std::to_string(instance)));
        auto state = AdamState<double>::init(params);

        // Fixed batch of 4 samples.
        std::vector<std::vector<std::int32_t>> batch_ids;
        std::vector<std::vector<double>> batch_p;
        std::vector<int> batch_y;
        for (int s = 0; s < 4; ++s) {
            batch_ids.push_back(random_sentence(rng, config.dims.vocab, 2, config.dims.max_len));
            batch_p.push_back(testfix::random_topic_vector<double>(config.dims.topics, rng));
            batch_y.push_back(static_cast<int>(rng.below(2)));
        }

        auto batch_loss = [&](const ModelParams<double>& theta) {
            double total = 0.0;
            for (int s = 0; s < 4; ++s) {
                const auto t = forward<double>(batch_ids[static_cast<std::size_t>(s)],
                                               batch_p[static_cast<std::size_t>(s)], theta,
                                               RunMode::kEval, 0.0, nullptr);
                total += weighted_bce(t.output, batch_y[static_cast<std::size_t>(s)], 0.8, 0.2);
            }
            return total / 4.0;
        };

        const double before = batch_loss(params);
        auto grads = params.zeros_like();
        for (int s = 0; s < 4; ++s) {
            const auto t = forward<double>(batch_ids[static_cast<std::size_t>(s)],
                                           batch_p[static_cast<std::size_t>(s)], params,
                                           RunMode::kEval, 0.0, nullptr);
            accumulate(grads, backward<double>(t, batch_y[static_cast<std::size_t>(s)], params,
                                               0.8, 0.2));
        }
        scale(grads, 0.25);
        adam_step(params, grads, state, tc);
        const double after = batch_loss(params);
        CHECK(after <= before + 1e-9);
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("shuffle permutes without dropping or duplicating") {
    Rng rng(6);
    std::vector<int> items(257);
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<int>(i);
    auto shuffled = items;
    rng.shuffle(shuffled);
    CHECK(shuffled != items);
    auto sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == items);
}

TEST_CASE("train: empty dataset and zero epochs") {
    ModelConfig config = testfix::tiny_model_config(14);
    auto params = init_params<float>(config, 3);
    TrainConfig tc;

    CHECK_THROWS_AS(train(LabeledDataset{}, params, tc), DataError);

    const auto dataset = separable_dataset(10, config.dims.topics, 4);
    tc.max_epochs = 0;
    const auto result = train(dataset, params, tc);
    CHECK(result.history.empty());
    CHECK(result.params.embed == params.embed);
}

TEST_CASE("train is deterministic and drives the loss down on separable data") {
    ModelConfig config = testfix::tiny_model_config(14);
    config.dims.max_len = 6;
    const auto dataset = separable_dataset(15, config.dims.topics, 4);

    TrainConfig tc;
    tc.lr = 0.01;
    tc.batch_size = 10;
    tc.dropout = 0.1;
    tc.max_epochs = 40;
    tc.patience = 40;
    tc.val_fraction = 0.2;
    tc.seed = 9;

    const auto params = init_params<float>(config, 8);
    const auto first = train(dataset, params, tc);
    const auto second = train(dataset, params, tc);

    REQUIRE(!first.history.empty());
    REQUIRE(first.history.size() == second.history.size());
    for (std::size_t e = 0; e < first.history.size(); ++e) {
        CHECK(first.history[e].train_loss == second.history[e].train_loss);
        CHECK(first.history[e].val_loss == second.history[e].val_loss);
    }

    const auto dir = testfix::scratch_dir("trainer-determinism");
    save_model(first.params, dir / "a.ckpt", tc.seed);
    save_model(second.params, dir / "b.ckpt", tc.seed);
    CHECK(read_text_file(dir / "a.ckpt") == read_text_file(dir / "b.ckpt"));

    // Separable tokens: the loss should fall decisively.
    CHECK(first.history.back().train_loss < 0.5 * first.history.front().train_loss);
}

}  // TEST_SUITE
