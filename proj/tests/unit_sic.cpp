#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sicra/channel.hpp>
#include <sicra/rng.hpp>
#include <sicra/sic.hpp>

#include <algorithm>
#include <vector>

using namespace sicra;

namespace {

SlotReception slot(std::vector<RxEntry> entries) {
    SlotReception r;
    r.entries = std::move(entries);
    return r;
}

RxEntry rx(int id, double power, double residual = 0.0) {
    RxEntry e;
    e.node_id = id;
    e.true_power = power;
    e.estimated_power = power;
    e.residual_power = residual;
    return e;
}

ChannelParams unit_params(double gamma_rate = 1.0, double noise = 1.0) {
    ChannelParams p;
    p.rate_threshold = gamma_rate;  // rate 1 -> gamma 1
    p.noise_power = noise;
    return p;
}

}  // namespace

TEST_CASE("ordering ranks by power with id tie-break") {
    auto r = slot({rx(7, 3.0), rx(3, 1.0), rx(5, 2.0)});
    CHECK(order_slot(r, CsiMode::Perfect) == std::vector<int>{7, 5, 3});

    auto tie = slot({rx(9, 2.0), rx(2, 2.0), rx(4, 2.0)});
    CHECK(order_slot(tie, CsiMode::Perfect) == std::vector<int>{2, 4, 9});

    CHECK(order_slot(slot({}), CsiMode::Perfect).empty());
}

TEST_CASE("imperfect ordering follows the estimate, not the truth") {
    RxEntry a = rx(1, 3.0);
    a.estimated_power = 1.0;
    RxEntry b = rx(2, 1.0);
    b.estimated_power = 3.0;
    auto r = slot({a, b});
    CHECK(order_slot(r, CsiMode::Perfect) == std::vector<int>{1, 2});
    CHECK(order_slot(r, CsiMode::Imperfect) == std::vector<int>{2, 1});
}

TEST_CASE("single signal decodes iff it clears the SNR threshold") {
    const auto params = unit_params();  // gamma 1, noise 1
    auto strong = decode_slot(slot({rx(1, 2.0)}), params, CsiMode::Perfect);
    CHECK(strong.decoded_count == 1);
    CHECK(strong.per_node == std::vector<bool>{true});

    auto weak = decode_slot(slot({rx(1, 0.5)}), params, CsiMode::Perfect);
    CHECK(weak.decoded_count == 0);
    CHECK(weak.per_node == std::vector<bool>{false});

    auto edge = decode_slot(slot({rx(1, 1.0)}), params, CsiMode::Perfect);
    CHECK(edge.decoded_count == 1);  // threshold itself succeeds
}

TEST_CASE("cancellation exposes a weaker second signal") {
    const auto params = unit_params();
    // 10/(1+0.1) passes, then 0.1/1 fails.
    auto partial =
        decode_slot(slot({rx(1, 10.0), rx(2, 0.1)}), params, CsiMode::Perfect);
    CHECK(partial.decoded_count == 1);
    CHECK(partial.per_node == std::vector<bool>{true, false});

    // 10/(1+3) passes, then 3/1 passes.
    auto both =
        decode_slot(slot({rx(1, 10.0), rx(2, 3.0)}), params, CsiMode::Perfect);
    CHECK(both.decoded_count == 2);
    CHECK(both.per_node == std::vector<bool>{true, true});

    // Strongest blocked: nothing decodes even though rank 2 alone would pass.
    auto blocked =
        decode_slot(slot({rx(1, 3.0), rx(2, 2.9)}), params, CsiMode::Perfect);
    CHECK(blocked.decoded_count == 0);
    CHECK(blocked.per_node == std::vector<bool>{false, false});

    CHECK(decode_slot(slot({}), params, CsiMode::Perfect).decoded_count == 0);
}

TEST_CASE("residuals of cancelled signals stay in the interference") {
    const auto params = unit_params();
    // rank 1: 10/(1+3+0.5) >= 1; rank 2: 3/(1+0.5) >= 1 -> both decode
    auto ok = decode_slot(slot({rx(1, 10.0, 0.5), rx(2, 3.0)}), params,
                          CsiMode::Imperfect);
    CHECK(ok.decoded_count == 2);

    // rank 2 now sees 3/(1+4.0) < 1
    auto tail = decode_slot(slot({rx(1, 10.0, 4.0), rx(2, 3.0)}), params,
                            CsiMode::Imperfect);
    CHECK(tail.decoded_count == 1);

    // Own-signal residual counts against rank 1 itself: 2/(1+1.1) < 1.
    auto own =
        decode_slot(slot({rx(1, 2.0, 1.1)}), params, CsiMode::Imperfect);
    CHECK(own.decoded_count == 0);
    auto own_ok =
        decode_slot(slot({rx(1, 2.0, 0.9)}), params, CsiMode::Imperfect);
    CHECK(own_ok.decoded_count == 1);

    // Perfect mode ignores the residual fields entirely.
    auto perfect =
        decode_slot(slot({rx(1, 2.0, 100.0)}), params, CsiMode::Perfect);
    CHECK(perfect.decoded_count == 1);
}

TEST_CASE("decoded set is always a prefix of the power order") {
    Rng rng(314);
    const auto params = unit_params();
    for (int trial = 0; trial < 2000; ++trial) {
        const int m = 1 + int(rng.next_double() * 8);
        std::vector<RxEntry> entries;
        for (int i = 0; i < m; ++i) {
            RxEntry e = rx(i, sample_power(0.5, rng));
            e.residual_power = 0.05 * sample_power(1.0, rng);
            entries.push_back(e);
        }
        const auto mode =
            trial % 2 ? CsiMode::Perfect : CsiMode::Imperfect;
        auto rec = slot(entries);
        auto result = decode_slot(rec, params, mode);

        REQUIRE(int(result.order.size()) == m);
        REQUIRE(int(result.per_node.size()) == m);
        CHECK(result.decoded_count >= 0);
        CHECK(result.decoded_count <= m);

        // per-node flags must mark exactly the first decoded_count ranks
        auto sorted = order_slot(rec, mode);
        CHECK(sorted == result.order);
        int flagged = 0;
        for (int rank = 0; rank < m; ++rank) {
            const int id = result.order[rank];
            const std::size_t pos =
                std::find_if(entries.begin(), entries.end(),
                             [&](const RxEntry& e) { return e.node_id == id; }) -
                entries.begin();
            const bool expect = rank < result.decoded_count;
            CHECK(result.per_node[pos] == expect);
            flagged += result.per_node[pos];
        }
        CHECK(flagged == result.decoded_count);
    }
}

TEST_CASE("less noise never decodes fewer signals") {
    Rng rng(2718);
    auto loud = unit_params();
    auto quiet = unit_params();
    quiet.noise_power = 0.5;
    for (int trial = 0; trial < 2000; ++trial) {
        const int m = 1 + int(rng.next_double() * 6);
        std::vector<RxEntry> entries;
        for (int i = 0; i < m; ++i) entries.push_back(rx(i, sample_power(1.0, rng)));
        auto rec = slot(entries);
        const int base = decode_slot(rec, loud, CsiMode::Perfect).decoded_count;
        const int better = decode_slot(rec, quiet, CsiMode::Perfect).decoded_count;
        CHECK(better >= base);
    }
}

TEST_CASE("boosting a signal that stays undecoded never helps the rest") {
    Rng rng(999);
    const auto params = unit_params();
    int exercised = 0;
    for (int trial = 0; trial < 4000; ++trial) {
        const int m = 2 + int(rng.next_double() * 5);
        std::vector<RxEntry> entries;
        for (int i = 0; i < m; ++i) entries.push_back(rx(i, sample_power(1.0, rng)));
        auto rec = slot(entries);
        auto before = decode_slot(rec, params, CsiMode::Perfect);
        if (before.decoded_count == m) continue;

        // bump one undecoded entry
        int victim = -1;
        for (int i = 0; i < m; ++i)
            if (!before.per_node[i]) victim = i;
        REQUIRE(victim >= 0);
        auto bumped = rec;
        bumped.entries[victim].true_power *= 1.0 + rng.next_double();
        bumped.entries[victim].estimated_power =
            bumped.entries[victim].true_power;
        auto after = decode_slot(bumped, params, CsiMode::Perfect);
        // premise: the bumped signal must still be undecoded afterwards
        if (after.per_node[victim]) continue;
        ++exercised;
        CHECK(after.decoded_count <= before.decoded_count);
    }
    CHECK(exercised > 500);
}
