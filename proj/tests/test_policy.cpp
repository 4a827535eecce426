#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vam/error.hpp"
#include "vam/policy.hpp"
#include "vam/prompt.hpp"

using namespace vam;
using namespace vam::policy;
using chess::UciMove;

namespace {

std::vector<UciMove> moves(std::initializer_list<const char*> xs) {
  std::vector<UciMove> out;
  for (const char* x : xs) out.push_back(UciMove::parse(x));
  return out;
}

std::string chosen(const std::string& out) {
  const auto legal = chess::legal_moves(chess::Position{});
  const auto p = prompt::parse_output(out, legal, std::nullopt);
  return p.move ? p.move->str() : "-";
}

verifier::ValueMap values() {
  verifier::ValueMap vm;
  vm.scores = {{UciMove::parse("a2a3"), 0.2}, {UciMove::parse("b2b3"), 0.9}, {UciMove::parse("c2c3"), 0.4}};
  return vm;
}

// Serves POST /generate on a random port until destroyed.
struct Server {
  httplib::Server svr;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};

  explicit Server(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    svr.Post("/generate", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      handler(req, res);
    });
    port = svr.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }
  ~Server() {
    svr.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/generate"; }
};

}  // namespace

TEST_CASE("greedy oracle") {
  const auto vm = values();
  GreedyOracle g;
  PolicyRequest req{"p", chess::legal_moves(chess::Position{}), moves({"a2a3", "b2b3", "c2c3"}), &vm};
  const auto outs = g.sample(req, 3);
  REQUIRE(outs.size() == 3);
  for (const auto& o : outs) CHECK(chosen(o) == "b2b3");
  req.mask = moves({"a2a3", "c2c3"});
  CHECK(chosen(g.sample(req, 1).front()) == "c2c3");
  req.values = nullptr;
  CHECK_THROWS_AS(g.sample(req, 1), Error);
}

TEST_CASE("round robin keeps its counter across calls") {
  RoundRobinScript rr;
  PolicyRequest req{"p", chess::legal_moves(chess::Position{}), moves({"a2a3", "b2b3", "c2c3"}), nullptr};
  const auto first = rr.sample(req, 2);
  const auto second = rr.sample(req, 2);
  CHECK(chosen(first[0]) == "a2a3");
  CHECK(chosen(first[1]) == "b2b3");
  CHECK(chosen(second[0]) == "c2c3");
  CHECK(chosen(second[1]) == "a2a3");
}

TEST_CASE("softmax oracle") {
  const auto vm = values();
  const auto legal = chess::legal_moves(chess::Position{});
  PolicyRequest req{"p", legal, moves({"a2a3", "b2b3", "c2c3"}), &vm};

  SoftmaxOracle broken(1.0, 1.0, 1);
  for (const auto& o : broken.sample(req, 8)) {
    CHECK(prompt::parse_output(o, legal, req.mask).verdict == prompt::VerdictKind::Malformed);
  }

  SoftmaxOracle a(0.05, 0.0, 42);
  SoftmaxOracle b(0.05, 0.0, 42);
  const auto xa = a.sample(req, 16);
  CHECK(xa == b.sample(req, 16));
  SoftmaxOracle warm(1.0, 0.0, 42);
  CHECK(warm.sample(req, 16) != warm.sample(req, 16));  // the call counter changes the stream
  int best = 0;
  for (const auto& o : xa) best += chosen(o) == "b2b3";
  CHECK(best >= 14);  // low temperature concentrates on the argmax

  CHECK_THROWS_AS(SoftmaxOracle(0.0, 0.0, 1), Error);
  CHECK_THROWS_AS(SoftmaxOracle(1.0, 1.5, 1), Error);
}

TEST_CASE("uniform random covers the candidates deterministically") {
  const auto legal = chess::legal_moves(chess::Position{});
  PolicyRequest req{"p", legal, std::nullopt, nullptr};
  UniformRandom a(7);
  UniformRandom b(7);
  const auto xa = a.sample(req, 400);
  CHECK(xa == b.sample(req, 400));
  std::set<std::string> seen;
  for (const auto& o : xa) seen.insert(chosen(o));
  CHECK(seen.size() == 20);
}

TEST_CASE("fixed outputs wrap around") {
  FixedOutputs f({"x", "y"});
  PolicyRequest req{"p", chess::legal_moves(chess::Position{}), std::nullopt, nullptr};
  CHECK(f.sample(req, 3) == std::vector<std::string>{"x", "y", "x"});
  CHECK_THROWS_AS(FixedOutputs({}), Error);
}

TEST_CASE("remote endpoint contract") {
  Server server([](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    std::vector<std::string> outs(body.at("n").get<std::size_t>(), "<uci_move>e2e4</uci_move>");
    outs[0] = body.at("prompt").get<std::string>() + "|" + std::to_string(body.at("max_tokens").get<int>());
    res.set_content(nlohmann::json{{"outputs", outs}}.dump(), "application/json");
  });
  RemoteEndpoint ep(server.url(), {0.7, 0.9, 123}, 2000, 0, 1);
  PolicyRequest req{"hello", chess::legal_moves(chess::Position{}), std::nullopt, nullptr};
  const auto outs = ep.sample(req, 3);
  REQUIRE(outs.size() == 3);
  CHECK(outs[0] == "hello|123");
  CHECK(outs[2] == "<uci_move>e2e4</uci_move>");
}

TEST_CASE("remote endpoint failures") {
  PolicyRequest req{"p", chess::legal_moves(chess::Position{}), std::nullopt, nullptr};
  auto kind_of = [&](RemoteEndpoint& ep) {
    try {
      ep.sample(req, 2);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoFailure;
  };

  Server failing([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  RemoteEndpoint a(failing.url(), {}, 1000, 2, 1);
  CHECK(kind_of(a) == ErrorKind::EndpointUnavailable);
  CHECK(failing.hits == 3);  // first try plus two retries

  Server short_reply([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"outputs": ["only one"]})", "application/json");
  });
  RemoteEndpoint b(short_reply.url(), {}, 1000, 0, 1);
  CHECK(kind_of(b) == ErrorKind::EndpointUnavailable);

  Server slow([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"outputs": ["a", "b"]})", "application/json");
  });
  RemoteEndpoint c(slow.url(), {}, 150, 0, 1);
  CHECK(kind_of(c) == ErrorKind::GenerationTimeout);

  RemoteEndpoint d("http://127.0.0.1:1/generate", {}, 500, 0, 1);
  CHECK(kind_of(d) == ErrorKind::EndpointUnavailable);
  CHECK_THROWS_AS(RemoteEndpoint("no-scheme", {}), Error);
}

TEST_CASE("policy factory") {
  PolicyConfig c;
  CHECK(make_policy(c)->name() == "greedy_oracle");
  c.kind = "uniform_random";
  CHECK(make_policy(c)->name() == "uniform_random");
  c.kind = "remote_endpoint";
  CHECK_THROWS_AS(make_policy(c), Error);
  c.url = "http://127.0.0.1:9/x";
  CHECK(make_policy(c)->name() == "remote_endpoint");
  c.kind = "gpt";
  CHECK_THROWS_AS(make_policy(c), Error);
}
