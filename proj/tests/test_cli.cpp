#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "tkgrules/rule_io.hpp"

namespace fs = std::filesystem;
using namespace tkgr;

namespace {

struct Workspace {
    fs::path dir;

    Workspace() {
        dir = fs::temp_directory_path() / ("tkgr_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        write("train.txt",
              "a\tdated\tb\t1\na\tdated\tb\t3\na\tengaged\tb\t5\n"
              "c\tdated\td\t2\nc\tdated\td\t4\nc\tengaged\td\t6\n");
        write("valid.txt", "a\tdated\tb\t7\n");
        write("test.txt", "c\tdated\td\t9\na\tengaged\tb\t10\n");
        write("empty.txt", "");
        write("other.txt", "x\tdated\ty\t1\nx\tdated\ty\t2\n");
    }
    ~Workspace() { fs::remove_all(dir); }

    void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    std::string read(const std::string& name) const {
        std::ifstream in(dir / name);
        return {std::istreambuf_iterator<char>(in), {}};
    }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "tkgrules");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> data(const Workspace& w) {
    return {"--train", w.path("train.txt"), "--valid", w.path("valid.txt"), "--test", w.path("test.txt")};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("cli: learn writes the expected rules deterministically") {
    Workspace w;
    auto args = cat(cat({"learn"}, data(w)), {"--min-support", "2", "--out", w.path("rules.jsonl")});
    auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("xy") != std::string::npos);
    auto rules = load_rules(w.path("rules.jsonl"));
    std::size_t original_xy = 0;
    for (const auto& rule : rules.rules) {
        if (rule.kind == RuleKind::Xy && rule.head < rules.info.num_relations) ++original_xy;
    }
    CHECK(original_xy == 2);
    CHECK(fs::exists(w.dir / "entity2id.txt"));
    CHECK(fs::exists(w.dir / "relation2id.txt"));
    CHECK(w.read("rules.jsonl").find("dated(x,y,t*) <- dated(x,y,t)") != std::string::npos);

    const auto first = w.read("rules.jsonl");
    REQUIRE(run(cat(args, {"--threads", "3"})).code == 0);
    CHECK(w.read("rules.jsonl") == first);
}

TEST_CASE("cli: usage and data errors") {
    Workspace w;
    CHECK(run({}).code == 1);
    CHECK(run({"learn", "--out", w.path("r.jsonl")}).code == 1);
    CHECK(run({"learn", "--train", w.path("train.txt"), "--bogus"}).code == 1);
    CHECK(run({"learn", "--train", w.path("train.txt"), "--out", w.path("r.jsonl"), "--window", "0"}).code == 1);
    CHECK(run({"learn", "--train", w.path("train.txt"), "--out", w.path("r.jsonl"), "--decay", "0.5"}).code == 1);
    CHECK(run({"--help"}).code == 0);

    auto empty = run({"learn", "--train", w.path("empty.txt"), "--out", w.path("none.jsonl")});
    CHECK(empty.code == 2);
    CHECK_FALSE(fs::exists(w.dir / "none.jsonl"));

    w.write("bad.txt", "a\tr\tb\n");
    auto bad = run({"learn", "--train", w.path("bad.txt"), "--out", w.path("none.jsonl")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("train:1") != std::string::npos);
}

TEST_CASE("cli: eval reports, splits and vocabulary checks") {
    Workspace w;
    REQUIRE(run(cat(cat({"learn"}, data(w)), {"--min-support", "2", "--out", w.path("rules.jsonl")})).code == 0);
    auto eval = cat(cat({"eval"}, data(w)), {"--rules", w.path("rules.jsonl")});
    auto test = run(cat(eval, {"--out", w.path("test.json"), "--ranks", w.path("ranks.tsv")}));
    REQUIRE(test.code == 0);
    CHECK(test.out.find("MRR") != std::string::npos);
    auto valid = run(cat(eval, {"--split", "valid", "--out", w.path("valid.json")}));
    REQUIRE(valid.code == 0);
    CHECK(w.read("test.json") != w.read("valid.json"));

    auto report = nlohmann::json::parse(w.read("test.json"));
    CHECK(report["metrics"]["queries"] == 4);
    CHECK(report["config"]["window"] == "50");
    CHECK(report["config"]["split"] == "test");
    CHECK(report["config"]["tie_policy"] == "average");
    CHECK(w.read("ranks.tsv").find("subject\trelation") == 0);

    auto threaded = run(cat(eval, {"--threads", "4", "--out", w.path("test4.json")}));
    REQUIRE(threaded.code == 0);
    CHECK(w.read("test4.json") == w.read("test.json"));

    auto mismatch = run({"eval", "--train", w.path("other.txt"), "--test", w.path("test.txt"), "--rules",
                         w.path("rules.jsonl")});
    CHECK(mismatch.code == 2);
    CHECK(mismatch.err.find("vocabulary") != std::string::npos);
}

TEST_CASE("cli: config file with flag override") {
    Workspace w;
    w.write("run.cfg", "# learning setup\nwindow = 30\nmin_support=2\npsmooth=5\ndecay=0.8\n");
    auto base = cat(cat({"learn"}, data(w)), {"--config", w.path("run.cfg"), "--out", w.path("rules.jsonl")});
    REQUIRE(run(base).code == 0);
    CHECK(load_rules(w.path("rules.jsonl")).info.window == 30);
    CHECK(load_rules(w.path("rules.jsonl")).info.smoothing == 5.0);
    REQUIRE(run(cat(base, {"--window", "20"})).code == 0);
    CHECK(load_rules(w.path("rules.jsonl")).info.window == 20);

    w.write("typo.cfg", "windw=3\n");
    CHECK(run(cat(cat({"learn"}, data(w)), {"--config", w.path("typo.cfg"), "--out", w.path("x.jsonl")})).code == 1);
}

TEST_CASE("cli: predict, explain and ablate") {
    Workspace w;
    REQUIRE(run(cat(cat({"learn"}, data(w)), {"--min-support", "2", "--out", w.path("rules.jsonl")})).code == 0);
    auto common = cat(data(w), {"--rules", w.path("rules.jsonl")});

    auto pred = run(cat(cat({"predict"}, common), {"--top-k", "2"}));
    REQUIRE(pred.code == 0);
    std::istringstream lines(pred.out);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j["candidates"].size() <= 2);
        CHECK(j.contains("rank"));
        ++n;
    }
    CHECK(n == 4);

    auto none = run(cat(cat({"predict"}, common), {"--rule-types", "none"}));
    REQUIRE(none.code == 0);
    CHECK(nlohmann::json::parse(none.out.substr(0, none.out.find('\n')))["candidates"].empty());

    auto ex = run(cat(cat({"explain"}, common), {"--query", "c,dated,9"}));
    REQUIRE(ex.code == 0);
    auto first = nlohmann::json::parse(ex.out.substr(0, ex.out.find('\n')));
    CHECK(first["candidate"] == "d");
    CHECK(first["query"]["time"] == "9");
    double miss = 1.0, damp = 1.0;
    for (const auto& row : first["rules"]) {
        miss *= 1.0 - row["conf"].get<double>() * damp;
        damp *= 0.9;
    }
    CHECK(first["score"].get<double>() == doctest::Approx(1.0 - miss));

    CHECK(run(cat(cat({"explain"}, common), {"--query", "zz,dated,9"})).code == 2);
    CHECK(run(cat(cat({"explain"}, common), {"--query", "c,dated"})).code == 1);
    CHECK(run(cat(cat({"explain"}, common), {"--query", "c,dated,9", "--candidate", "a"})).code == 2);

    auto ab = run(cat(cat({"ablate"}, data(w)), {"--min-support", "2", "--out", w.path("ablate.json")}));
    REQUIRE(ab.code == 0);
    auto table = nlohmann::json::parse(w.read("ablate.json"));
    CHECK(table["rows"].size() == 15);
    CHECK(ab.out.find("all-rec") != std::string::npos);
}
