#include <doctest.h>

#include "extsumm/config.hpp"
#include "extsumm/errors.hpp"
#include "extsumm/io.hpp"
#include "fixtures.hpp"

using namespace extsumm;

TEST_SUITE("config") {

TEST_CASE("defaults carry the reference parameterization") {
    const PipelineConfig c;
    CHECK(c.labeler_match_threshold == 0.75);
    CHECK(c.labeler_salience_floor == 0.05);
    CHECK(c.labeler_negative_ratio == 4);
    CHECK(c.trainer_pos_weight == 0.8);
    CHECK(c.trainer_neg_weight == 0.2);
    CHECK(c.trainer_lr == 0.001);
    CHECK(c.trainer_beta1 == 0.9);
    CHECK(c.trainer_beta2 == 0.999);
    CHECK(c.trainer_batch_size == 500);
    CHECK(c.trainer_dropout == 0.2);
    CHECK(c.embeddings_dim == 100);
    CHECK(c.model_context == 10);
    CHECK(c.topics_count == 500);
    CHECK(c.model_hidden == 200);
    CHECK(c.model_classifier == 100);
    CHECK(c.extract_budget_words == 125);
    CHECK(c.rouge_length_limit == 125);
    CHECK(c.rouge_max_order == 4);
    CHECK(c.rouge_resamples == 1000);
    // alpha defaults to 50/M.
    CHECK(c.resolved_topics_alpha() == doctest::Approx(0.1));
}

TEST_CASE("parse accepts key=value lines with comments and blank lines") {
    const auto c = parse_config_text(
        "# comment line\n"
        "seed = 7\n"
        "\n"
        "trainer.lr = 0.01  # trailing comment\n"
        "model.attention = linear\n"
        "rouge.bootstrap = true\n");
    CHECK(c.seed == 7);
    CHECK(c.trainer_lr == 0.01);
    CHECK(c.model_attention == "linear");
    CHECK(c.rouge_bootstrap);
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config_text("trainer.lrr = 0.01\n"),
                         doctest::Contains("trainer.lrr"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("seed = 1\nnot_a_key = 2\nanother.bad = 3\n"),
                         doctest::Contains("another.bad"), ConfigError);
}

TEST_CASE("bad values and domain violations are rejected") {
    CHECK_THROWS_AS(parse_config_text("trainer.lr = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("trainer.dropout = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("labeler.match_threshold = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("model.attention = sideways\n"), ConfigError);
}

TEST_CASE("overrides win and validate") {
    PipelineConfig c = parse_config_text("trainer.lr = 0.01\n");
    apply_override(c, "trainer.lr", "0.05");
    CHECK(c.trainer_lr == 0.05);
    CHECK_THROWS_WITH_AS(apply_override(c, "bogus.key", "1"), doctest::Contains("bogus.key"),
                         ConfigError);
    CHECK_THROWS_AS(apply_override(c, "trainer.batch_size", "0"), ConfigError);
}

TEST_CASE("canonical text round-trips and hashes stably") {
    PipelineConfig c;
    c.seed = 1234;
    c.trainer_lr = 0.0042;
    c.model_attention = "linear";
    const auto text = c.to_text();
    const auto parsed = parse_config_text(text);
    CHECK(parsed.to_text() == text);
    CHECK(parsed.hash() == c.hash());

    PipelineConfig other = c;
    other.seed = 1235;
    CHECK(other.hash() != c.hash());
}

TEST_CASE("config file loading") {
    const auto dir = testfix::scratch_dir("config-file");
    write_text_file(dir / "run.cfg", "seed = 21\ntopics.count = 6\ntrainer.max_epochs = 3\n");
    const auto c = load_config(dir / "run.cfg");
    CHECK(c.seed == 21);
    CHECK(c.topics_count == 6);
    CHECK(c.trainer_max_epochs == 3);
    CHECK(c.resolved_topics_alpha() == doctest::Approx(50.0 / 6.0));
}

TEST_CASE("derived sub-configs pull from the right namespaces") {
    PipelineConfig c;
    c.seed = 5;
    c.labeler_match_threshold = 0.9;
    c.trainer_batch_size = 32;
    c.embeddings_dim = 12;
    CHECK(c.labeling().match_threshold == 0.9);
    CHECK(c.training().batch_size == 32);
    CHECK(c.skipgram().dim == 12);
    CHECK(c.model(100).dims.vocab == 100);
    CHECK(c.model(100).dims.embed == 12);
    // Module seeds are derived, not shared.
    CHECK(c.labeling().seed != c.training().seed);
}

}  // TEST_SUITE
