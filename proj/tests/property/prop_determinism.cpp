#include "metaplan/sweep.hpp"

#include <gtest/gtest.h>

using namespace metaplan;

TEST(Determinism, RepeatedSweepIsByteIdentical) {
    ExperimentConfig c;
    c.seeds = 4;
    c.tasks = 6;
    c.base_seed = 1234;
    c.variants = {"oracle", "pomrl", "ada_pomrl", "no_meta", "aggregating"};
    c.schedules = {"fixed", "dong", "bound_guided", "best_fixed", "dynamic_best"};
    const std::string first = raw_csv(execute_sweep(c, 1).runs);
    const std::string second = raw_csv(execute_sweep(c, 1).runs);
    const std::string threaded = raw_csv(execute_sweep(c, 4).runs);
    EXPECT_EQ(first, second);
    EXPECT_EQ(first, threaded);
    EXPECT_EQ(sha256_hex(first), sha256_hex(second));

    c.base_seed = 1235;
    EXPECT_NE(raw_csv(execute_sweep(c, 1).runs), first);
}
