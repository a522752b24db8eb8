#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "qnet/core.hpp"
#include "qnet/physics.hpp"

namespace qnet {

enum class Feature { HEG, HEP, HES, ECC, GQM, FGO };
inline constexpr std::array<Feature, 6> kAllFeatures = {Feature::HEG, Feature::HEP, Feature::HES,
                                                        Feature::ECC, Feature::GQM, Feature::FGO};

enum class FeatureNeed { Required, NotRequired, Selectable };

enum class LinkProtocol { SimultaneousLink, OneByOneLink };
enum class NetworkModel { ConnectionOriented, Connectionless };

enum class Support { Allowed, Disallowed, Selectable, NotConsidered };

std::string_view to_string(Feature f);
std::string_view to_string(FeatureNeed n);
std::string_view to_string(LinkProtocol p);
std::string_view to_string(NetworkModel m);
std::string_view to_string(Support s);
std::optional<LinkProtocol> parse_link_protocol(std::string_view s);  // "sl" | "ol"

// Per-class node requirements and protocol admissibility.
class CapabilityMatrix {
public:
    static const CapabilityMatrix& standard();

    FeatureNeed feature(RepeaterClass c, Feature f) const;
    Support link(RepeaterClass c, LinkProtocol p) const;
    Support model(RepeaterClass c, NetworkModel m) const;

private:
    struct Row {
        std::array<FeatureNeed, 6> features;
        std::array<Support, 2> links;   // SL, OL
        std::array<Support, 2> models;  // CO, CL
    };
    std::array<Row, 4> rows_{};

    CapabilityMatrix();
};

Support supports_link(RepeaterClass c, LinkProtocol p);
Support supports_model(RepeaterClass c, NetworkModel m);

// Selectable cells resolve through the all-photonic options; unset means
// NotRequired.
FeatureNeed resolve_feature(RepeaterClass c, Feature f, const AllPhotonicOptions& options);

struct CapabilityViolation {
    std::string reason;
};

// Empty optional means the request is admissible.
std::optional<CapabilityViolation> validate_request(RepeaterClass c, LinkProtocol p,
                                                    NetworkModel m);

// Aligned text grid, header plus one row per class.
std::string render_matrix();

} // namespace qnet
