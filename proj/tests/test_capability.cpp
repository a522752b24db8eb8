#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qnet/capability.hpp"

using namespace qnet;

namespace {

// Rows of the published class characteristics table; columns
// HEG HEP HES ECC GQM FGO SL OL CO CL.
const char* kExpected[4][10] = {
    {"Y", "Y", "Y", "N", "Y", "N", "Y", "Y", "Y", "Y"},
    {"Y", "N", "Y", "Y", "Y", "N", "Y", "Y", "Y", "Y"},
    {"N", "N", "N", "Y", "N", "Y", "N", "Y", "Y", "Y"},
    {"Y", "sel", "Y", "sel", "N", "sel", "Y", "NC", "Y", "NC"},
};

} // namespace

TEST_CASE("capability matrix matches all forty cells") {
    const auto& m = CapabilityMatrix::standard();
    for (int r = 0; r < 4; ++r) {
        auto cls = kAllClasses[r];
        for (int f = 0; f < 6; ++f) {
            CAPTURE(r);
            CAPTURE(f);
            CHECK(to_string(m.feature(cls, kAllFeatures[f])) == kExpected[r][f]);
        }
        CHECK(to_string(m.link(cls, LinkProtocol::SimultaneousLink)) == kExpected[r][6]);
        CHECK(to_string(m.link(cls, LinkProtocol::OneByOneLink)) == kExpected[r][7]);
        CHECK(to_string(m.model(cls, NetworkModel::ConnectionOriented)) == kExpected[r][8]);
        CHECK(to_string(m.model(cls, NetworkModel::Connectionless)) == kExpected[r][9]);
    }
}

TEST_CASE("link and model lookups") {
    CHECK(supports_link(RepeaterClass::ThirdClass, LinkProtocol::SimultaneousLink) ==
          Support::Disallowed);
    CHECK(supports_link(RepeaterClass::AllPhotonic, LinkProtocol::OneByOneLink) ==
          Support::NotConsidered);
    CHECK(supports_link(RepeaterClass::FirstClass, LinkProtocol::OneByOneLink) ==
          Support::Allowed);
    CHECK(supports_model(RepeaterClass::AllPhotonic, NetworkModel::Connectionless) ==
          Support::NotConsidered);
    CHECK(supports_model(RepeaterClass::SecondClass, NetworkModel::Connectionless) ==
          Support::Allowed);
    CHECK(supports_model(RepeaterClass::ThirdClass, NetworkModel::ConnectionOriented) ==
          Support::Allowed);
}

TEST_CASE("selectable features follow the all-photonic options") {
    AllPhotonicOptions none;
    CHECK(resolve_feature(RepeaterClass::AllPhotonic, Feature::HEP, none) ==
          FeatureNeed::NotRequired);
    AllPhotonicOptions all{true, true, true};
    CHECK(resolve_feature(RepeaterClass::AllPhotonic, Feature::HEP, all) == FeatureNeed::Required);
    CHECK(resolve_feature(RepeaterClass::AllPhotonic, Feature::FGO, all) == FeatureNeed::Required);
    CHECK(resolve_feature(RepeaterClass::FirstClass, Feature::ECC, all) ==
          FeatureNeed::NotRequired);
}

TEST_CASE("validate_request examples") {
    using RC = RepeaterClass;
    using LP = LinkProtocol;
    using NM = NetworkModel;
    CHECK_FALSE(validate_request(RC::FirstClass, LP::SimultaneousLink, NM::ConnectionOriented));
    CHECK(validate_request(RC::FirstClass, LP::SimultaneousLink, NM::Connectionless));
    CHECK_FALSE(validate_request(RC::ThirdClass, LP::OneByOneLink, NM::Connectionless));
    CHECK_FALSE(validate_request(RC::AllPhotonic, LP::SimultaneousLink, NM::ConnectionOriented));
    CHECK(validate_request(RC::AllPhotonic, LP::SimultaneousLink, NM::Connectionless));
}

TEST_CASE("validate_request partitions all sixteen triples") {
    int ok = 0;
    for (auto c : kAllClasses)
        for (auto p : {LinkProtocol::SimultaneousLink, LinkProtocol::OneByOneLink})
            for (auto m : {NetworkModel::ConnectionOriented, NetworkModel::Connectionless}) {
                bool expect = supports_link(c, p) == Support::Allowed &&
                              supports_model(c, m) == Support::Allowed &&
                              !(m == NetworkModel::Connectionless &&
                                p == LinkProtocol::SimultaneousLink);
                auto v = validate_request(c, p, m);
                CHECK(v.has_value() != expect);
                if (v) CHECK_FALSE(v->reason.empty());
                ok += expect;
            }
    // first: SL/CO, OL/CO, OL/CL; second: same; third: OL/CO, OL/CL; photonic: SL/CO
    CHECK(ok == 9);
}

TEST_CASE("rendered matrix has a header and four class rows") {
    auto text = render_matrix();
    int lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 5);
    CHECK(text.find("all_photonic") != std::string::npos);
}
