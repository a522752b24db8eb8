#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qnet/resources.hpp"
#include "support.hpp"

using namespace qnet;

TEST_CASE("acquire is all or nothing") {
    Graph g(testing::chain(3, RepeaterClass::FirstClass));  // 4 slots each
    MemoryLedger ledger(g);
    SlotDemand big[] = {{0, 2}, {1, 5}};
    CHECK_FALSE(ledger.acquire(1, big, 0.0));
    CHECK(ledger.held(0) == 0);
    SlotDemand fit[] = {{0, 1}, {1, 2}, {2, 1}};
    CHECK(ledger.acquire(1, fit, 0.0));
    CHECK(ledger.held(1) == 2);
    CHECK(ledger.free(1) == 2);
    CHECK(ledger.held_by(1) == 4);
    SlotDemand twice[] = {{1, 1}, {1, 2}};
    CHECK_FALSE(ledger.can_acquire(twice));
}

TEST_CASE("release paths and slot-seconds") {
    Graph g(testing::chain(3, RepeaterClass::FirstClass));
    MemoryLedger ledger(g);
    CHECK(ledger.acquire(1, 1, 2, 0.0));
    CHECK(ledger.acquire(2, 1, 1, 1.0));
    ledger.release_slots(1, 1, 1, 2.0);
    CHECK(ledger.held_by(1, 1) == 1);
    ledger.release_node(1, 1, 4.0);
    CHECK(ledger.held_by(1, 1) == 0);
    // 2 slots for 2 s, then 1 slot for 2 more
    CHECK(ledger.slot_seconds(1, [](NodeIndex) { return true; }, 10.0) == doctest::Approx(6.0));
    CHECK(ledger.slot_seconds(2, [](NodeIndex) { return true; }, 10.0) == doctest::Approx(9.0));
    ledger.release_owner(2, 10.0);
    CHECK(ledger.held(1) == 0);
    for (const auto& r : ledger.records()) CHECK(r.released_at.has_value());
}

TEST_CASE("observer sees every change and never an overfull node") {
    Graph g(testing::chain(2, RepeaterClass::FirstClass));
    MemoryLedger ledger(g);
    int calls = 0;
    ledger.set_observer([&](const MemoryLedger& l, NodeIndex n) {
        ++calls;
        CHECK(l.held(n) <= l.capacity(n));
        CHECK(l.held(n) >= 0);
    });
    for (OwnerId o = 1; o <= 10; ++o) ledger.acquire(o, 0, 1, 0.0);
    CHECK(ledger.held(0) == 4);
    for (OwnerId o = 1; o <= 10; ++o) ledger.release_owner(o, 1.0);
    CHECK(ledger.held(0) == 0);
    CHECK(calls == 8);
}
