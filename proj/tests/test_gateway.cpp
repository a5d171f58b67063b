#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "sqleval/gateway.hpp"

#include "helpers.hpp"

using namespace sqleval;
using Catch::Approx;

namespace {

ChatRequest simple_request(const std::string& content) {
    ChatRequest req;
    req.messages = {{"user", content}};
    return req;
}

ProviderConfig mock_config(const std::filesystem::path& dir) {
    ProviderConfig cfg;
    cfg.base_url = "mock:" + dir.string();
    cfg.model = "scripted";
    cfg.backoff_base_seconds = 0.001;
    cfg.requests_per_minute = 100000;
    return cfg;
}

}  // namespace

TEST_CASE("extract_json_payload") {
    SECTION("fenced JSON after reasoning") {
        const Json j = extract_json_payload("step 1 think\nstep 2 think\n```json\n[{\"a\":1}]\n```");
        REQUIRE(j.is_array());
        CHECK(j[0]["a"] == 1);
    }

    SECTION("last parseable region wins") {
        const Json j = extract_json_payload("thought {not json} then [1,2]");
        REQUIRE(j.is_array());
        CHECK(j == Json::parse("[1,2]"));

        const Json obj = extract_json_payload("first [1] then {\"b\": 2}");
        CHECK(obj["b"] == 2);
    }

    SECTION("brackets inside strings do not confuse the scan") {
        const Json j = extract_json_payload(R"(noise {"s": "has ] and } inside", "n": 3} tail)");
        CHECK(j["n"] == 3);
    }

    SECTION("unbalanced tail falls back to earlier region") {
        const Json j = extract_json_payload("ok [1,2,3] then {\"oops\": ");
        CHECK(j.size() == 3);
    }

    SECTION("no JSON at all") {
        CHECK_THROWS_AS(extract_json_payload("no json here"), Error);
        try {
            extract_json_payload("only {broken json} here");
            FAIL("expected unparseable");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::unparseable);
        }
    }

    SECTION("round trip through prose") {
        Rng rng(0x7e57);
        for (int i = 0; i < 200; ++i) {
            Json v = Json::object();
            v["k" + std::to_string(rng.next_below(10))] = static_cast<int64_t>(rng.next_below(100));
            v["s"] = std::string(rng.next_below(5), 'z');
            const std::string blob = "reasoning first... answer: " + v.dump() + " thanks.";
            CHECK(extract_json_payload(blob) == v);
        }
    }
}

TEST_CASE("mock provider plays canned responses in order") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path() / "000.txt", "first response");
    testutil::write_file(tmp.path() / "001.txt", "second response");

    ChatClient client(mock_config(tmp.path()));
    CHECK(client.chat(simple_request("hi")).content == "first response");
    CHECK(client.chat(simple_request("hi")).content == "second response");

    // exhausted mock behaves like an unavailable provider
    CHECK_THROWS_AS(client.chat(simple_request("hi")), Error);
}

TEST_CASE("retry on transient failures, then success") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path() / "000.json", R"({"status": 429, "error": "rate limited"})");
    testutil::write_file(tmp.path() / "001.json", R"({"status": 503, "error": "overloaded"})");
    testutil::write_file(tmp.path() / "002.json", R"({"status": 200, "content": "finally"})");

    ChatClient client(mock_config(tmp.path()));
    std::vector<std::chrono::milliseconds> sleeps;
    client.sleep_hook = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };

    const ChatResult r = client.chat(simple_request("hi"));
    CHECK(r.content == "finally");
    CHECK(r.retries == 2);
    CHECK(sleeps.size() >= 2);  // one backoff per retry (pacing sleeps are zero here)
}

TEST_CASE("4xx other than 429 rejects without retry") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path() / "000.json", R"({"status": 401, "error": "bad key"})");
    testutil::write_file(tmp.path() / "001.json", R"({"status": 200, "content": "never reached"})");

    ChatClient client(mock_config(tmp.path()));
    try {
        client.chat(simple_request("hi"));
        FAIL("expected provider_rejected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::provider_rejected);
    }
}

TEST_CASE("retries exhaust into provider_unavailable") {
    testutil::TempDir tmp;
    for (int i = 0; i < 6; ++i)
        testutil::write_file(tmp.path() / ("00" + std::to_string(i) + ".json"), R"({"status": 500})");

    ProviderConfig cfg = mock_config(tmp.path());
    cfg.max_retries = 2;
    ChatClient client(cfg);
    client.sleep_hook = [](std::chrono::milliseconds) {};
    try {
        client.chat(simple_request("hi"));
        FAIL("expected provider_unavailable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::provider_unavailable);
    }
}

TEST_CASE("request validation") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.path() / "000.txt", "ok");
    ChatClient client(mock_config(tmp.path()));

    ChatRequest no_user;
    no_user.messages = {{"system", "rules"}};
    CHECK_THROWS_AS(client.chat(no_user), Error);

    ChatRequest hot = simple_request("hi");
    hot.temperature = 3.0;
    CHECK_THROWS_AS(client.chat(hot), Error);
}

TEST_CASE("token bucket paces to the configured rate") {
    using namespace std::chrono;
    TokenBucket bucket(2.0, 1.0);  // 2 tokens/sec, capacity 1
    const auto t0 = steady_clock::now();

    CHECK(bucket.take(t0).count() == 0);           // initial capacity
    const auto w1 = bucket.take(t0);               // empty: must wait ~500ms
    CHECK(w1.count() >= 480);
    CHECK(w1.count() <= 520);
    const auto w2 = bucket.take(t0);               // booked a further 500ms out
    CHECK(w2.count() >= 980);
    CHECK(w2.count() <= 1020);

    // after a long idle period only one capacity's worth is available
    const auto later = t0 + seconds(60);
    CHECK(bucket.take(later).count() == 0);
    CHECK(bucket.take(later).count() > 0);
}

TEST_CASE("http transport, auth header confinement and retry over real HTTP") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth;
    std::string seen_body;

    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++hits;
        seen_auth = req.get_header_value("Authorization");
        seen_body = req.body;
        if (n == 1) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        const Json reply = {
            {"choices", Json::array({Json{{"message", Json{{"role", "assistant"}, {"content", "pong"}}}}})},
            {"usage", Json{{"prompt_tokens", 12}, {"completion_tokens", 3}, {"total_tokens", 15}}},
        };
        res.set_content(reply.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

    setenv("SQLEVAL_TEST_KEY", "sk-test-123", 1);
    ProviderConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.model = "test-model";
    cfg.api_key_env = "SQLEVAL_TEST_KEY";
    cfg.backoff_base_seconds = 0.001;

    ChatClient client(cfg);
    ChatRequest req = simple_request("ping");
    req.temperature = 0.5;
    const ChatResult r = client.chat(req);

    CHECK(r.content == "pong");
    CHECK(r.retries == 1);
    CHECK(r.usage.total_tokens == 15);
    CHECK(hits.load() == 2);
    CHECK(seen_auth == "Bearer sk-test-123");
    // the key travels only in the Authorization header
    CHECK(seen_body.find("sk-test-123") == std::string::npos);
    const Json body = Json::parse(seen_body);
    CHECK(body["model"] == "test-model");
    CHECK(body["temperature"].get<double>() == Approx(0.5));
    CHECK(body["messages"][0]["content"] == "ping");

    SECTION("missing API key is a config error before any request") {
        ProviderConfig bad = cfg;
        bad.api_key_env = "SQLEVAL_TEST_KEY_DOES_NOT_EXIST";
        ChatClient unlucky(bad);
        const int before = hits.load();
        CHECK_THROWS_AS(unlucky.chat(simple_request("ping")), Error);
        CHECK(hits.load() == before);
    }

    server.stop();
    server_thread.join();
}
