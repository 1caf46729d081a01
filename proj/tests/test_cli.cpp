#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "unistab_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(UNISTAB_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    if (rc >= 0 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

// Value of `key=` in a space-separated token line.
std::string token_value(const std::string& line, const std::string& key) {
    const std::string needle = key + "=";
    size_t pos = line.find(needle);
    if (pos == std::string::npos) return "";
    pos += needle.size();
    const size_t end = line.find(' ', pos);
    return line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

double to_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

// Data rows of a simulate CSV: everything after the header line, with the
// echoed `# ` block skipped.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    bool seen_header = false;
    for (const std::string& line : lines_of(text)) {
        if (line.rfind("# ", 0) == 0 || line == "#") continue;
        if (!seen_header) {
            seen_header = true;
            continue;
        }
        if (!line.empty()) rows.push_back(split_csv(line));
    }
    return rows;
}

}  // namespace

TEST_CASE("threshold of a stabilizable pair") {
    RunResult r = run_cli("threshold 1.1 2.4");
    CHECK(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(std::abs(to_double(token_value(lines[0], "r")) - 0.99994261119081779) <= 1e-12);
    CHECK(token_value(lines[0], "m") == "2");
    CHECK(token_value(lines[0], "case") == "case_1a");
    CHECK(token_value(lines[0], "decision") == "stabilizable");
    CHECK(token_value(lines[0], "boundary_sensitive") == "0");
    CHECK(lines[1].find("stabilizable") != std::string::npos);
}

TEST_CASE("threshold of an unstabilizable four mode system") {
    RunResult r = run_cli("threshold 0.5 0.5 1.5 1.5");
    CHECK(r.code == 1);
    const auto lines = lines_of(r.out);
    REQUIRE(!lines.empty());
    CHECK(std::abs(to_double(token_value(lines[0], "r")) - 1.125) <= 1e-12);
    CHECK(token_value(lines[0], "case") == "case_2");
    CHECK(token_value(lines[0], "decision") == "unstabilizable");
    CHECK(token_value(lines[0], "subsystem") == "1.5,1.5");
}

TEST_CASE("threshold of a stable singleton and of a boundary triple") {
    RunResult stable = run_cli("threshold 0.2");
    CHECK(stable.code == 0);
    CHECK(stable.out.find("case=all_stable") != std::string::npos);

    RunResult boundary =
        run_cli("threshold 1.224744871391589 1.224744871391589 1.224744871391589");
    CHECK(boundary.code == 2);
    CHECK(boundary.out.find("case=boundary") != std::string::npos);
    CHECK(boundary.out.find("decision=inconclusive_at_threshold") != std::string::npos);
}

TEST_CASE("threshold argument validation") {
    CHECK(run_cli("threshold").code == 64);
    CHECK(run_cli("threshold 1.1 abc").code == 64);
    CHECK(run_cli("threshold 1.1 0").code == 64);
    CHECK(run_cli("").code == 64);
    CHECK(run_cli("frobnicate").code == 64);
}

TEST_CASE("threshold can write to a file") {
    const fs::path out = scratch_dir() / "threshold_out.txt";
    RunResult r = run_cli("threshold 1.1 2.4 --out " + out.string());
    CHECK(r.code == 0);
    CHECK(slurp(out).find("case=case_1a") != std::string::npos);
}

TEST_CASE("simulate echoes its effective config and reports per step columns") {
    const fs::path cfg = scratch_dir() / "greedy.cfg";
    spit(cfg,
         "[spectrum]\n"
         "lambdas = 1.2 1.5\n"
         "\n"
         "[simulation]\n"
         "horizon = 40\n"
         "trials = 8\n"
         "seed = 7\n"
         "record_weighted = stationary\n"
         "\n"
         "[policy]\n"
         "kind = greedy\n"
         "weights = stationary\n");
    RunResult r = run_cli("simulate " + cfg.string());
    CHECK(r.code == 0);
    CHECK(r.err.empty());

    const auto lines = lines_of(r.out);
    REQUIRE(!lines.empty());
    CHECK(lines[0].rfind("# ", 0) == 0);
    bool header_found = false;
    for (const auto& line : lines)
        if (line == "step,mean_sq_norm,std_err,mean_weighted,weighted_std_err")
            header_found = true;
    CHECK(header_found);

    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 41);
    REQUIRE(rows[0].size() == 5);
    CHECK(rows[0][0] == "0");
    CHECK(to_double(rows[0][1]) == 2.0);
    CHECK(to_double(rows[0][2]) == 0.0);
    CHECK(to_double(rows[0][3]) > 0.0);

    RunResult again = run_cli("simulate " + cfg.string());
    CHECK(again.out == r.out);
}

TEST_CASE("the echoed config block reproduces the run byte for byte") {
    const fs::path cfg = scratch_dir() / "mixed.cfg";
    spit(cfg,
         "# q resolves to a concrete survival probability in the echo\n"
         "[spectrum]\n"
         "lambdas = 1.2 1.5 0.5 0.5\n"
         "[simulation]\n"
         "horizon = 30\n"
         "trials = 16\n"
         "seed = 9\n"
         "[policy]\n"
         "kind = mixed\n"
         "q = auto\n");
    RunResult first = run_cli("simulate " + cfg.string());
    REQUIRE(first.code == 0);

    std::string stripped;
    for (const auto& line : lines_of(first.out)) {
        if (line.rfind("# ", 0) == 0) stripped += line.substr(2) + "\n";
    }
    REQUIRE(!stripped.empty());
    const fs::path cfg2 = scratch_dir() / "mixed_roundtrip.cfg";
    spit(cfg2, stripped);
    RunResult second = run_cli("simulate " + cfg2.string());
    CHECK(second.code == 0);
    CHECK(second.out == first.out);
}

TEST_CASE("uncontrolled stable simulation matches the closed form") {
    const fs::path cfg = scratch_dir() / "zero.cfg";
    spit(cfg,
         "[spectrum]\n"
         "lambdas = 0.5 0.9\n"
         "[simulation]\n"
         "horizon = 5\n"
         "[policy]\n"
         "kind = zero\n");
    RunResult r = run_cli("simulate " + cfg.string());
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 6);
    for (int n = 0; n <= 5; ++n) {
        REQUIRE(rows[n].size() == 5);
        const double expected = std::pow(0.81, n) + std::pow(0.25, n);
        CHECK(std::abs(to_double(rows[n][1]) - expected) <= 1e-12 * expected);
        CHECK(rows[n][3].empty());
        CHECK(rows[n][4].empty());
    }
}

TEST_CASE("greedy control drives the weighted mean far down over long horizons") {
    const fs::path cfg = scratch_dir() / "decay.cfg";
    spit(cfg,
         "[spectrum]\n"
         "lambdas = 1.2 1.5\n"
         "[simulation]\n"
         "horizon = 500\n"
         "trials = 1000\n"
         "seed = 3\n"
         "record_weighted = stationary\n"
         "[policy]\n"
         "kind = greedy\n"
         "weights = stationary\n");
    RunResult r = run_cli("simulate " + cfg.string());
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 501);
    const double initial = to_double(rows[0][3]);
    const double final_w = to_double(rows[500][3]);
    REQUIRE(initial > 0.0);
    CHECK(final_w / initial < 1e-20);
}

TEST_CASE("config errors carry line and field diagnostics") {
    const fs::path unknown_key = scratch_dir() / "unknown_key.cfg";
    spit(unknown_key,
         "[spectrum]\n"
         "lambdas = 1.2 1.5\n"
         "bogus = 3\n"
         "[policy]\n"
         "kind = zero\n");
    RunResult r = run_cli("simulate " + unknown_key.string());
    CHECK(r.code == 65);
    CHECK(r.err.find("config error") != std::string::npos);
    CHECK(r.err.find("bogus") != std::string::npos);
    CHECK(r.err.find("line 3") != std::string::npos);

    const fs::path missing = scratch_dir() / "missing_lambdas.cfg";
    spit(missing,
         "[simulation]\n"
         "horizon = 5\n"
         "[policy]\n"
         "kind = zero\n");
    CHECK(run_cli("simulate " + missing.string()).code == 65);

    const fs::path bad_kind = scratch_dir() / "bad_kind.cfg";
    spit(bad_kind,
         "[spectrum]\n"
         "lambdas = 1.2 1.5\n"
         "[policy]\n"
         "kind = pid\n");
    RunResult bk = run_cli("simulate " + bad_kind.string());
    CHECK(bk.code == 65);
    CHECK(bk.err.find("policy.kind") != std::string::npos);

    const fs::path bad_x0 = scratch_dir() / "bad_x0.cfg";
    spit(bad_x0,
         "[spectrum]\n"
         "lambdas = 1.2 1.5\n"
         "[simulation]\n"
         "x0 = 1 2 3\n"
         "[policy]\n"
         "kind = zero\n");
    CHECK(run_cli("simulate " + bad_x0.string()).code == 65);

    const fs::path dup = scratch_dir() / "dup.cfg";
    spit(dup,
         "[spectrum]\n"
         "lambdas = 1.2 1.5\n"
         "lambdas = 2.0 3.0\n"
         "[policy]\n"
         "kind = zero\n");
    CHECK(run_cli("simulate " + dup.string()).code == 65);

    const fs::path orphan = scratch_dir() / "orphan.cfg";
    spit(orphan,
         "lambdas = 1.2 1.5\n"
         "[policy]\n"
         "kind = zero\n");
    CHECK(run_cli("simulate " + orphan.string()).code == 65);

    const fs::path hopeless = scratch_dir() / "hopeless_mixed.cfg";
    spit(hopeless,
         "[spectrum]\n"
         "lambdas = 1.5 2 0.9\n"
         "[policy]\n"
         "kind = mixed\n");
    RunResult hm = run_cli("simulate " + hopeless.string());
    CHECK(hm.code == 65);
    CHECK(hm.err.find("policy.q") != std::string::npos);

    CHECK(run_cli("simulate " + (scratch_dir() / "does_not_exist.cfg").string()).code == 65);
}

TEST_CASE("sweep produces a full grid with predictions") {
    RunResult r = run_cli("sweep --min1 1 --max1 2 --steps1 2 --min2 1 --max2 2 --steps2 2");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "lambda1,lambda2,r,predicted,empirical_rate,empirical_verdict");
    const auto last = split_csv(lines[4]);
    REQUIRE(last.size() == 6);
    CHECK(to_double(last[0]) == 2.0);
    CHECK(to_double(last[1]) == 2.0);
    CHECK(std::abs(to_double(last[2]) - 2.0) <= 1e-12);
    CHECK(last[3] == "unstabilizable");
    CHECK(last[4].empty());
    CHECK(last[5].empty());

    const auto first = split_csv(lines[1]);
    CHECK(first[3] == "stabilizable");

    RunResult again = run_cli("sweep --min1 1 --max1 2 --steps1 2 --min2 1 --max2 2 --steps2 2");
    CHECK(again.out == r.out);
}

TEST_CASE("paired four dimensional sweep template") {
    RunResult r = run_cli(
        "sweep --template four_d_paired --min1 1.5 --max1 1.5 --steps1 2 "
        "--min2 1.5 --max2 1.5 --steps2 2");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 5);
    for (int i = 1; i <= 4; ++i) {
        const auto row = split_csv(lines[i]);
        CHECK(std::abs(to_double(row[2]) - 1.6875) <= 1e-12);
        CHECK(row[3] == "unstabilizable");
    }
}

TEST_CASE("empirical sweep columns") {
    const std::string args =
        "sweep --min1 1.2 --max1 1.2 --steps1 2 --min2 1.5 --max2 1.5 --steps2 2 "
        "--trials 100 --horizon 300 --seed 1";
    RunResult r = run_cli(args);
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 5);
    for (int i = 1; i <= 4; ++i) {
        const auto row = split_csv(lines[i]);
        REQUIRE(row.size() == 6);
        CHECK(row[3] == "stabilizable");
        CHECK(!row[4].empty());
        CHECK(row[5] == "bounded");
    }
    RunResult again = run_cli(args);
    CHECK(again.out == r.out);
}

TEST_CASE("near threshold cells are not simulated") {
    RunResult r = run_cli(
        "sweep --min1 1.4142135623730951 --max1 1.4142135623730951 --steps1 2 "
        "--min2 1.4142135623730951 --max2 1.4142135623730951 --steps2 2 "
        "--trials 50 --horizon 100");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 5);
    const auto row = split_csv(lines[1]);
    CHECK(row[4].empty());
    CHECK(row[5] == "indeterminate");
}

TEST_CASE("sweep argument validation") {
    CHECK(run_cli("sweep --steps1 1").code == 64);
    CHECK(run_cli("sweep --min1 0").code == 64);
    CHECK(run_cli("sweep --min1 2 --max1 1").code == 64);
    CHECK(run_cli("sweep --template diagonal").code == 64);
}

TEST_CASE("weight solver output in the supplied order") {
    RunResult r = run_cli("solve-weights 1.5 2");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 3);
    REQUIRE(lines[0].rfind("p = ", 0) == 0);
    std::istringstream ptokens(lines[0].substr(4));
    double p1 = 0.0, p2 = 0.0;
    ptokens >> p1 >> p2;
    CHECK(p1 == 1.0);
    CHECK(std::abs(p2 - 3.1604938271604937) <= 1e-6);
    REQUIRE(lines[1].rfind("residual = ", 0) == 0);
    CHECK(to_double(lines[1].substr(11)) <= 1e-9);
    REQUIRE(lines[2].rfind("r = ", 0) == 0);
    CHECK(std::abs(to_double(lines[2].substr(4)) - 1.44) <= 1e-12);
}

TEST_CASE("weight solver on a symmetric triple") {
    RunResult r = run_cli("solve-weights 2 2 2");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    std::istringstream ptokens(lines[0].substr(4));
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
        ptokens >> v;
        CHECK(std::abs(v - 1.0) <= 1e-9);
    }
    CHECK(std::abs(to_double(lines[2].substr(4)) - 8.0 / 3.0) <= 1e-12);
}

TEST_CASE("weight solver reports infeasible targets") {
    RunResult r = run_cli("solve-weights 1.05 2 2");
    CHECK(r.code == 3);
    CHECK(r.err.find("-0.289") != std::string::npos);
    CHECK(r.err.find("1.05") != std::string::npos);
}

TEST_CASE("weight solver argument validation") {
    CHECK(run_cli("solve-weights").code == 64);
    CHECK(run_cli("solve-weights 1.5 2 --q 1.5").code == 64);
    CHECK(run_cli("solve-weights 1.5 2 --q 0").code == 64);
}

TEST_CASE("weight solver with reduced survival probability") {
    RunResult r = run_cli("solve-weights 1.2 1.3 1.4 --q 0.7");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    CHECK(to_double(lines[1].substr(11)) <= 1e-9);
    CHECK(std::abs(to_double(lines[2].substr(4)) - 1.2803637551935017) <= 1e-10);
}

TEST_CASE("self checks pass and the fault injection is caught") {
    RunResult r = run_cli("verify");
    CHECK(r.code == 0);
    for (const char* name : {"trace-identity", "closed-form-2d", "geometric-weights",
                             "sphere-moments", "sphere-area", "drop-calibration"}) {
        CHECK(r.out.find(std::string("check ") + name + ": PASS") != std::string::npos);
    }

    RunResult reseeded = run_cli("verify --seed 123");
    CHECK(reseeded.code == 0);

    RunResult faulty = run_cli("verify --inject-fault expectation-bias");
    CHECK(faulty.code == 1);
    CHECK(faulty.out.find("check trace-identity: FAIL") != std::string::npos);

    CHECK(run_cli("verify --inject-fault bogus").code == 64);
}
