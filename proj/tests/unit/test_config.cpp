#include <doctest.h>

#include "osp/cli/config.hpp"

using namespace osp;
using namespace osp::cli;

namespace {

const char* kChain = R"(
; comment
[problem]
beta = 1
reward = "3, 1, 1, 2"
side = two_sided

[process]
family = ctmc
states = 4
transitions = 1>2:1, 1>4:1, 2>3:2, 3>4:2
)";

const char* kOu = R"(
[problem]
beta = 1
reward = "pos(x)^2"

[process]
family = diffusion
model = ornstein_uhlenbeck
gamma = 1

[verify]
deltas = -0.5, 0.5
)";

}  // namespace

TEST_CASE("numbers are written with 17 significant digits") {
  CHECK(num(0.1) == "0.10000000000000001");
  CHECK(num(2.0) == "2");
  CHECK(num(-kInf) == "-inf");
}

TEST_CASE("chain config") {
  const auto c = parse_config(kChain, "out/x");
  REQUIRE(c.problem.is_chain());
  const auto& ch = std::get<FiniteCTMC>(c.problem.process);
  CHECK(ch.n_states() == 4);
  CHECK(ch.rates(2, 3) == 2.0);
  CHECK(c.problem.chain_reward == std::vector<double>{3, 1, 1, 2});
  CHECK(c.output_dir == "out/x");
}

TEST_CASE("resolved config round-trips") {
  for (const char* text : {kChain, kOu}) {
    const auto a = parse_config(text, "out/a");
    const auto t = resolved_text(a);
    const auto b = parse_config(t, "out/b");
    CHECK(resolved_text(b) == t);
    CHECK(b.output_dir == "out/a");
  }
  const auto a = parse_config(kOu, "out/a");
  CHECK(a.verify.deltas == std::vector<double>{-0.5, 0.5});
  CHECK(resolved_text(a).find("grid_points = 512") != std::string::npos);
  CHECK(resolved_text(a).find("reward = \"pos(x)^2\"") != std::string::npos);
}

TEST_CASE("invalid configs are rejected") {
  const std::string base = "[problem]\nbeta = 1\nreward = \"x\"\n[process]\nfamily = levy\n";
  CHECK_NOTHROW(parse_config(base, "o"));
  CHECK_THROWS_AS(parse_config(base + "colour = red\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "[solver]\ngrid_point = 3\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "[extra]\na = 1\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nbeta = -1\nreward = \"x\"\n[process]\nfamily = levy\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nbeta = 1\nreward = \"x +\"\n[process]\nfamily = levy\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nbeta = 1\nreward = \"x\"\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "sigma = 0\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "[verify]\ndt = 0\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config(base + "[verify]\npaths = many\n", "o"), ConfigError);
  std::string chain = kChain;
  CHECK_THROWS_AS(parse_config(chain + "[solver]\ndamping = 2\n", "o"), ConfigError);
  CHECK_THROWS_AS(parse_config(std::string(kChain).replace(chain.find("3>4:2"), 5, "3>5:2"), "o"), ConfigError);
}
