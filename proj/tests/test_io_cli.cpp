#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "latticelab/cli.hpp"
#include "latticelab/io.hpp"

using namespace latticelab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("latticelab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string slurp(const fs::path& p) { return io::read_text(p.string()); }

}  // namespace

TEST_CASE("distance CSV ingest") {
  const auto sp = io::parse_distance_csv("a,b,c\n0,1,2\n1,0,1.5\n2,1.5,0\n");
  CHECK(sp.size() == 3);
  CHECK(sp.label(2) == "c");
  CHECK(sp.distance(0, 2) == 2.0);
  const auto labelled = io::parse_distance_csv(",a,b\na,0,3\nb,3,0\n");
  CHECK(labelled.distance(0, 1) == 3.0);
  CHECK_THROWS_AS(io::parse_distance_csv("a,b\n0,1\n2,0\n"), MetricValidationError);
  try {
    io::parse_distance_csv("a,b\n0,x\n1,0\n", "m.csv");
    FAIL("expected a parse error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("m.csv") != std::string::npos);
  }
}

TEST_CASE("coordinate CSV of zero plus ten reciprocals has delta 1/90") {
  std::string text = "label,x\n0,0\n";
  for (int k = 1; k <= 10; ++k) text += "1/" + std::to_string(k) + "," + std::to_string(1.0 / k) + "\n";
  const auto sp = io::parse_space(text, "pts.csv");
  CHECK(sp.size() == 11);
  CHECK(discreteness_constant(sp) == doctest::Approx(1.0 / 90).epsilon(1e-6));
}

TEST_CASE("family JSON round-trips for generators and stored members") {
  for (const auto& fam : {harmonic_truncation(1.0, 8, 1000), step_family(2.0, 10, 50), reciprocal_family(3, 40)}) {
    const auto back = io::family_from_json(io::parse_json(io::dump(io::family_to_json(fam)), "f"));
    CHECK(back.name() == fam.name());
    CHECK(back.horizon() == fam.horizon());
    for (std::uint64_t n : {1, 7, 40}) CHECK(back.member(n) == fam.member(n));
  }
  std::vector<LatticeElement> xs{LatticeElement(Carrier::index_set(2), {1.0, 2.0}),
                                 LatticeElement(Carrier::index_set(2), {0.5, 0.25})};
  const auto ext = SequenceFamily::extensional(xs);
  const auto j = io::family_to_json(ext);
  const auto back = io::family_from_json(j);
  CHECK(back.member(2) == xs[1]);

  auto bad = j;
  bad["members"][1] = io::json::array({1.0, 2.0, 3.0});
  try {
    io::family_from_json(bad);
    FAIL("expected a size mismatch");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("member 2 has 3 values but the carrier has 2") != std::string::npos);
  }
}

TEST_CASE("witness JSON round-trips") {
  const auto step = step_family(4.0, 32, 100);
  CheckOptions o;
  o.horizon = 100;
  const auto w = extract_big_jump_witness(step, {}, 1.0, 5, {}, o);
  const auto back = io::jump_witness_from_json(io::to_json(w));
  CHECK(back.indices == w.indices);
  CHECK(back.coordinates == w.coordinates);
  CHECK(back.jump_values == w.jump_values);
  CHECK(verify_jump_witness(step, back).ok);
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch("codes");
  CHECK(invoke({"--version"}).code == 0);
  CHECK(invoke({"check"}).code == 2);
  CHECK(invoke({"check", "--family", (dir / "missing.json").string()}).code == 2);
  write(dir / "broken.json", "{\"schema_version\": 1,");
  CHECK(invoke({"check", "--family", (dir / "broken.json").string()}).code == 2);

  const auto gen = invoke({"generate", "harmonic", "--prefix", "8", "--horizon", "1000", "--out", dir.string()});
  REQUIRE(gen.code == 0);
  const auto fam = (dir / "family.json").string();
  CHECK(invoke({"check", "--family", fam, "--mode", "order", "--horizon", "1000", "--tolerance", "0.01"}).code == 0);
  CHECK(invoke({"check", "--family", fam, "--mode", "banana"}).code == 2);

  const auto step_dir = scratch("step");
  REQUIRE(invoke({"generate", "step", "--horizon", "200", "--out", step_dir.string()}).code == 0);
  const auto step = (step_dir / "family.json").string();
  const auto cauchy = invoke({"check", "--family", step, "--mode", "buo-cauchy", "--policy", "sampled", "--include",
                           "1,2,3,4", "--horizon", "200"});
  CHECK(cauchy.code == 1);
  const auto refusal = invoke({"witness", "blocks", "--family", fam, "--p", "2", "--horizon", "1000"});
  CHECK(refusal.code == 1);
  CHECK(refusal.out.find("limit in ℓ_p") != std::string::npos);
}

TEST_CASE("CLI witness replay detects tampering with exit code 3") {
  const auto dir = scratch("tamper");
  REQUIRE(invoke({"generate", "step", "--horizon", "200", "--out", dir.string()}).code == 0);
  const auto fam = (dir / "family.json").string();
  const auto w = invoke({"witness", "jumps", "--family", fam, "--count", "20", "--horizon", "200", "--out", dir.string()});
  REQUIRE(w.code == 0);
  const auto path = dir / "witness.json";
  const auto ok = invoke({"verify", "--witness", path.string(), "--family", fam});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("verified 20") != std::string::npos);

  auto j = io::parse_json(slurp(path), "witness.json");
  j["jump_values"][4] = 9.0;
  write(dir / "tampered.json", io::dump(j));
  const auto bad = invoke({"verify", "--witness", (dir / "tampered.json").string(), "--family", fam});
  CHECK(bad.code == 3);
  CHECK(bad.err.find("witness verification failed at index 4") != std::string::npos);
}

TEST_CASE("CLI reports carry provenance with input digests") {
  const auto dir = scratch("prov");
  write(dir / "m.csv", "a,b,c\n0,1,2\n1,0,1.5\n2,1.5,0\n");
  const auto r = invoke({"metric", "--space", (dir / "m.csv").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto j = io::parse_json(slurp(dir / "profile.json"), "profile.json");
  CHECK(j["provenance"]["inputs"][0]["name"] == "m.csv");
  CHECK(j["provenance"]["inputs"][0]["sha256"] == io::sha256_hex(slurp(dir / "m.csv")));
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
