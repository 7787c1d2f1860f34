#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "latticelab/counterexamples.hpp"
#include "latticelab/witnesses.hpp"

namespace latticelab::io {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

/// Reads a whole file; InputError when it cannot be opened.
std::string read_text(const std::string& path);
/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Header row of labels, symmetric numeric body. A leading empty header
/// cell means every body row starts with its label.
FiniteMetricSpace parse_distance_csv(std::string_view text, std::string_view source = "input");
/// Header "label,x1,...,xk", one point per row.
FiniteMetricSpace parse_coords_csv(std::string_view text, std::string_view source = "input");
/// Header "label,value": a function on the space (every label exactly once).
LatticeElement parse_function_csv(std::string_view text, const Carrier& carrier, std::string_view source = "input");

enum class Format { DistanceCsv, CoordsCsv, FamilyJson };
Format parse_format(std::string_view text);
/// Picks coords-csv when the header starts with "label", else distance-csv.
FiniteMetricSpace parse_space(std::string_view text, std::string_view source, std::optional<Format> format = {});

json to_json(const TailDescriptor& t);
TailDescriptor tail_from_json(const json& j, const std::string& where);
json to_json(const Carrier& c);
Carrier carrier_from_json(const json& j, const std::string& where);
json to_json(const LatticeElement& x);
LatticeElement element_from_json(const json& j, const Carrier& carrier, const std::string& where);
json to_json(const FamilyMetadata& m);
FamilyMetadata metadata_from_json(const json& j, const Carrier& carrier, const std::string& where);

/// Named generators are stored by name and parameters; anything else is
/// materialised member by member.
json family_to_json(const SequenceFamily& f);
SequenceFamily family_from_json(const json& j);

json to_json(const ConvergenceVerdict& v);
json to_json(const OrderCertificate& c);
OrderCertificate order_certificate_from_json(const json& j, const Carrier& carrier);
json to_json(const UniformCauchyCertificate& c);
UniformCauchyCertificate uniform_certificate_from_json(const json& j);

json to_json(const JumpWitness& w);
JumpWitness jump_witness_from_json(const json& j);
json to_json(const BlockWitness& w);
BlockWitness block_witness_from_json(const json& j);
json to_json(const RefutationCertificate& c);

json to_json(const IsolationProfile& p, const FiniteMetricSpace& space);
json to_json(const EscapeReport& r);
json to_json(const LipCounterexample& c);
json to_json(const PowerLawFit& f);

/// Parses JSON text with InputError diagnostics.
json parse_json(std::string_view text, std::string_view source);
/// Two-space indented, trailing newline.
std::string dump(const json& j);

}  // namespace latticelab::io
