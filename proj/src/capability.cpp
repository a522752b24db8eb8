#include "qnet/capability.hpp"

#include <cstdio>

namespace qnet {

namespace {

constexpr auto Y = FeatureNeed::Required;
constexpr auto N = FeatureNeed::NotRequired;
constexpr auto S = FeatureNeed::Selectable;

constexpr auto OK = Support::Allowed;
constexpr auto NO = Support::Disallowed;
constexpr auto NC = Support::NotConsidered;

std::size_t row_of(RepeaterClass c) { return static_cast<std::size_t>(c); }

} // namespace

std::string_view to_string(Feature f) {
    switch (f) {
    case Feature::HEG: return "HEG";
    case Feature::HEP: return "HEP";
    case Feature::HES: return "HES";
    case Feature::ECC: return "ECC";
    case Feature::GQM: return "GQM";
    case Feature::FGO: return "FGO";
    }
    return "?";
}

std::string_view to_string(FeatureNeed n) {
    switch (n) {
    case FeatureNeed::Required: return "Y";
    case FeatureNeed::NotRequired: return "N";
    case FeatureNeed::Selectable: return "sel";
    }
    return "?";
}

std::string_view to_string(LinkProtocol p) {
    return p == LinkProtocol::SimultaneousLink ? "sl" : "ol";
}

std::string_view to_string(NetworkModel m) {
    return m == NetworkModel::ConnectionOriented ? "co" : "cl";
}

std::string_view to_string(Support s) {
    switch (s) {
    case Support::Allowed: return "Y";
    case Support::Disallowed: return "N";
    case Support::Selectable: return "sel";
    case Support::NotConsidered: return "NC";
    }
    return "?";
}

std::optional<LinkProtocol> parse_link_protocol(std::string_view s) {
    if (s == "sl") return LinkProtocol::SimultaneousLink;
    if (s == "ol") return LinkProtocol::OneByOneLink;
    return std::nullopt;
}

CapabilityMatrix::CapabilityMatrix() {
    //                                  HEG HEP HES ECC GQM FGO    SL  OL     CO  CL
    rows_[row_of(RepeaterClass::FirstClass)] = {{Y, Y, Y, N, Y, N}, {OK, OK}, {OK, OK}};
    rows_[row_of(RepeaterClass::SecondClass)] = {{Y, N, Y, Y, Y, N}, {OK, OK}, {OK, OK}};
    rows_[row_of(RepeaterClass::ThirdClass)] = {{N, N, N, Y, N, Y}, {NO, OK}, {OK, OK}};
    rows_[row_of(RepeaterClass::AllPhotonic)] = {{Y, S, Y, S, N, S}, {OK, NC}, {OK, NC}};
}

const CapabilityMatrix& CapabilityMatrix::standard() {
    static const CapabilityMatrix table;
    return table;
}

FeatureNeed CapabilityMatrix::feature(RepeaterClass c, Feature f) const {
    return rows_[row_of(c)].features[static_cast<std::size_t>(f)];
}

Support CapabilityMatrix::link(RepeaterClass c, LinkProtocol p) const {
    return rows_[row_of(c)].links[p == LinkProtocol::SimultaneousLink ? 0 : 1];
}

Support CapabilityMatrix::model(RepeaterClass c, NetworkModel m) const {
    return rows_[row_of(c)].models[m == NetworkModel::ConnectionOriented ? 0 : 1];
}

Support supports_link(RepeaterClass c, LinkProtocol p) {
    return CapabilityMatrix::standard().link(c, p);
}

Support supports_model(RepeaterClass c, NetworkModel m) {
    return CapabilityMatrix::standard().model(c, m);
}

FeatureNeed resolve_feature(RepeaterClass c, Feature f, const AllPhotonicOptions& options) {
    FeatureNeed need = CapabilityMatrix::standard().feature(c, f);
    if (need != FeatureNeed::Selectable) return need;
    bool selected = false;
    switch (f) {
    case Feature::HEP: selected = options.hep; break;
    case Feature::ECC: selected = options.ecc; break;
    case Feature::FGO: selected = options.fgo; break;
    default: break;
    }
    return selected ? FeatureNeed::Required : FeatureNeed::NotRequired;
}

std::optional<CapabilityViolation> validate_request(RepeaterClass c, LinkProtocol p,
                                                    NetworkModel m) {
    const std::string cls(to_string(c));
    if (Support s = supports_link(c, p); s != Support::Allowed)
        return CapabilityViolation{"link protocol " + std::string(to_string(p)) + " is " +
                                   std::string(to_string(s)) + " for class " + cls};
    if (Support s = supports_model(c, m); s != Support::Allowed)
        return CapabilityViolation{"network model " + std::string(to_string(m)) + " is " +
                                   std::string(to_string(s)) + " for class " + cls};
    if (m == NetworkModel::Connectionless && p != LinkProtocol::OneByOneLink)
        return CapabilityViolation{"connectionless forwarding requires one-by-one link"};
    return std::nullopt;
}

std::string render_matrix() {
    const auto& t = CapabilityMatrix::standard();
    std::string out;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-14s", "class");
    out += buf;
    for (auto f : kAllFeatures) {
        std::snprintf(buf, sizeof buf, "%-5s", std::string(to_string(f)).c_str());
        out += buf;
    }
    out += "SL   OL   CO   CL\n";
    for (auto c : kAllClasses) {
        std::snprintf(buf, sizeof buf, "%-14s", std::string(to_string(c)).c_str());
        out += buf;
        auto cell = [&](std::string_view v) {
            std::snprintf(buf, sizeof buf, "%-5s", std::string(v).c_str());
            out += buf;
        };
        for (auto f : kAllFeatures) cell(to_string(t.feature(c, f)));
        cell(to_string(t.link(c, LinkProtocol::SimultaneousLink)));
        cell(to_string(t.link(c, LinkProtocol::OneByOneLink)));
        cell(to_string(t.model(c, NetworkModel::ConnectionOriented)));
        cell(to_string(t.model(c, NetworkModel::Connectionless)));
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

} // namespace qnet
