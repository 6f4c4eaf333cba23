#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "spotindex/catalog.hpp"
#include "spotindex/errors.hpp"

using namespace spotindex;
using spotindex::testing::Gen;
using spotindex::testing::make_vm;

namespace {

const char* kHeader = "id,instance_type,zone,region,family,cpu_capacity,mem_capacity,on_demand_price\n";

Catalog from_csv(const std::string& body) {
  std::istringstream in(std::string(kHeader) + body);
  return load_catalog(in, CatalogFormat::csv, "cat.csv");
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("two well-formed records load") {
    const auto c = from_csv(
        "m4.large@a,m4.large,us-east-1a,us-east-1,general,2,8,0.1\n"
        "c4.xlarge@a,c4.xlarge,us-east-1a,us-east-1,compute,4,7.5,0.199\n");
    CHECK(c.size() == 2);
    CHECK(c.at("c4.xlarge@a").family == Family::compute);
    CHECK(c.at("m4.large@a").on_demand_price == doctest::Approx(0.1));
    CHECK(c.find("m4.large", "us-east-1a")->id == "m4.large@a");
    CHECK(c.find("nope") == nullptr);
    CHECK_THROWS_AS(c.at("nope"), OutOfRangeError);
  }

  TEST_CASE("zero memory capacity is rejected") {
    CHECK_THROWS_AS(from_csv("x,x,z,r,general,2,0,0.1\n"), InvariantError);
  }

  TEST_CASE("duplicate ids conflict") {
    CHECK_THROWS_AS(from_csv("x,x,z,r,general,2,8,0.1\nx,x,z,r,general,2,8,0.1\n"), ConflictError);
  }

  TEST_CASE("malformed records name line and field") {
    try {
      from_csv("x,x,z,r,general,2,8,0.1\ny,y,z,r,general,two,8,0.1\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.field() == "cpu_capacity");
    }
    CHECK_THROWS_AS(from_csv("x,x,z,r,general,2,8\n"), ParseError);
  }

  TEST_CASE("json lines catalog") {
    std::istringstream in(
        "{\"id\":\"a\",\"instance_type\":\"a\",\"zone\":\"z1\",\"region\":\"r\",\"family\":\"memory\","
        "\"cpu_capacity\":4,\"mem_capacity\":30.5,\"on_demand_price\":\"0.266\"}\n");
    const auto c = load_catalog(in, CatalogFormat::jsonl);
    REQUIRE(c.size() == 1);
    CHECK(c.at("a").mem_capacity == doctest::Approx(30.5));
    CHECK(c.at("a").on_demand_price == doctest::Approx(0.266));
  }

  TEST_CASE("csv round trip") {
    const auto c = spotindex::testing::market_catalog();
    std::ostringstream out;
    write_catalog_csv(out, c);
    std::istringstream in(out.str());
    const auto back = load_catalog(in, CatalogFormat::csv);
    REQUIRE(back.size() == c.size());
    for (const auto& s : c) {
      const auto& b = back.at(s.id);
      CHECK(b.cpu_capacity == s.cpu_capacity);
      CHECK(b.mem_capacity == s.mem_capacity);
      CHECK(b.on_demand_price == s.on_demand_price);
      CHECK(b.family == s.family);
    }
  }

  TEST_CASE("filter keeps only specs meeting the requirement") {
    const auto c = Catalog::from_specs({make_vm("a", 2, 8, 1), make_vm("b", 2, 16, 1), make_vm("c", 8, 4, 1)});
    const auto one = filter_candidate_ids(c, {2, 10}, CompositionScope::global());
    CHECK(one == std::vector<std::string>{"b"});
    CHECK(filter_candidate_ids(c, {0, 0}, CompositionScope::global()).size() == 3);
    CHECK(filter_candidate_ids(c, {100, 100}, CompositionScope::global()).empty());
  }

  TEST_CASE("market catalog with the long-running requirement has three candidates") {
    const auto ids = filter_candidate_ids(spotindex::testing::market_catalog(), {2, 10}, CompositionScope::global());
    CHECK(ids == std::vector<std::string>{"c4.2xlarge", "m4.2xlarge", "r4.xlarge"});
  }

  TEST_CASE("scope parsing") {
    const auto s = CompositionScope::parse("region:us-west-1,family:compute");
    CHECK(s.region == "us-west-1");
    CHECK(s.family == Family::compute);
    CHECK(!s.zone);
    CHECK(CompositionScope::parse("global").to_string() == "global");
    CHECK(CompositionScope::parse(s.to_string()).to_string() == s.to_string());
    CHECK_THROWS_AS(CompositionScope::parse("planet:earth"), Error);
  }

  TEST_CASE("property: filter monotone in requirement, nested scopes shrink") {
    Gen g(11);
    const std::vector<std::string> regions{"r1", "r2"};
    const std::vector<std::string> zones{"a", "b"};
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<VmSpec> specs;
      const int n = static_cast<int>(g.integer(1, 12));
      for (int i = 0; i < n; ++i) {
        auto v = g.vm("vm" + std::to_string(i));
        v.region = g.pick(regions);
        v.zone = v.region + g.pick(zones);
        v.family = static_cast<Family>(g.integer(0, 5));
        specs.push_back(v);
      }
      const auto c = Catalog::from_specs(specs);
      const ResourceRequirement lo{g.real(0, 32), g.real(0, 128)};
      const ResourceRequirement hi{lo.min_cpu + g.real(0, 16), lo.min_mem + g.real(0, 64)};
      const auto region = g.pick(regions);
      const auto zone = region + g.pick(zones);
      const auto a = filter_candidate_ids(c, lo, CompositionScope::global());
      const auto b = filter_candidate_ids(c, hi, CompositionScope::global());
      for (const auto& id : b) CHECK(std::find(a.begin(), a.end(), id) != a.end());
      const auto in_region = filter_candidate_ids(c, lo, CompositionScope::in_region(region));
      CompositionScope zs = CompositionScope::in_region(region);
      zs.zone = zone;
      const auto in_zone = filter_candidate_ids(c, lo, zs);
      for (const auto& id : in_region) CHECK(std::find(a.begin(), a.end(), id) != a.end());
      for (const auto& id : in_zone) CHECK(std::find(in_region.begin(), in_region.end(), id) != in_region.end());
      for (const auto& id : a) {
        const auto& s = c.at(id);
        CHECK(s.cpu_capacity >= lo.min_cpu);
        CHECK(s.mem_capacity >= lo.min_mem);
      }
    }
  }
}
