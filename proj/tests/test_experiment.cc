#include "ovsched/error.h"
#include "ovsched/experiment.h"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ovsched;
using namespace ovsched::literals;

namespace {

const std::string kTable2 = std::string(OVSCHED_SCENARIO_DIR) + "/table2.scn";

ErrorKind
KindOf(auto&& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e.Kind();
    }
    FAIL("expected an ovsched::Error");
    return ErrorKind::IoError;
}

std::string
MessageOf(auto&& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e.what();
    }
    return {};
}

std::string
Csv(const SweepTable& t)
{
    std::ostringstream s;
    WriteCsv(t, s);
    return s.str();
}

std::size_t
Lines(const std::string& text)
{
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

const char* kMinimal = R"(format ovsched-scenario/1
schedulers tsgs
step 10us
seeds 1
request id=0 deadline=1ms packets=2 airtime=23us
)";

} // namespace

TEST_CASE("time parsing is exact")
{
    CHECK(ParseTime("23us") == 23_us);
    CHECK(ParseTime("1.5ms") == 1500_us);
    CHECK(ParseTime("8.0328s") == TimeSpan(8'032'800));
    CHECK(ParseTime("0.0328s") == TimeSpan(32'800));
    CHECK(ParseTime("0us") == 0_us);
    CHECK_FALSE(ParseTime("0.5us"));
    CHECK_FALSE(ParseTime("1.0000001s"));
    CHECK_FALSE(ParseTime("23"));
    CHECK_FALSE(ParseTime("-1us"));
    CHECK_FALSE(ParseTime("1.us"));
    CHECK_FALSE(ParseTime("us"));
}

TEST_CASE("bundled table II scenario loads")
{
    const ScenarioSpec spec = LoadScenario(kTable2);
    REQUIRE(spec.requests.size() == 2);
    for (const auto& r : spec.requests)
    {
        CHECK(r.packet_count == 50);
        CHECK(r.packet_airtime == 23_us);
    }
    REQUIRE(spec.sweep);
    CHECK(spec.sweep->Points().size() == 10);
    CHECK(spec.sweep->Points().back() == 32'800_us);
    CHECK(spec.seeds.size() >= 20);
    CHECK(spec.schedulers == std::vector{Strategy::Tsgs, Strategy::Random});
}

TEST_CASE("scenario validation")
{
    CHECK_NOTHROW(ParseScenario(kMinimal));

    SUBCASE("empty request list")
    {
        const std::string text = "format ovsched-scenario/1\nschedulers tsgs\nstep 1us\nseeds 1\n";
        CHECK(KindOf([&] { ParseScenario(text); }) == ErrorKind::ValidationError);
    }
    SUBCASE("packet_count = 0 names the request and its line")
    {
        const std::string text = "format ovsched-scenario/1\nschedulers tsgs\nstep 1us\nseeds 1\n"
                                  "request id=0 deadline=1ms packets=0 airtime=23us\n";
        CHECK(KindOf([&] { ParseScenario(text, "x.scn"); }) == ErrorKind::ValidationError);
        const std::string msg = MessageOf([&] { ParseScenario(text, "x.scn"); });
        CHECK(msg.find("x.scn:5") != std::string::npos);
        CHECK(msg.find("request 0") != std::string::npos);
    }
    SUBCASE("inadmissible request")
    {
        const std::string text = "format ovsched-scenario/1\nschedulers tsgs\nstep 1us\nseeds 1\n"
                                  "request id=0 deadline=100us packets=5 airtime=23us\n";
        CHECK(KindOf([&] { ParseScenario(text); }) == ErrorKind::ValidationError);
    }
    SUBCASE("no seeds")
    {
        std::string text = kMinimal;
        text.replace(text.find("seeds 1\n"), 8, "");
        CHECK(KindOf([&] { ParseScenario(text); }) == ErrorKind::ValidationError);
    }
    SUBCASE("zero sweep step")
    {
        std::string text = std::string(kMinimal) + "sweep start=0us stop=10us step=0us\n";
        CHECK(KindOf([&] { ParseScenario(text); }) == ErrorKind::ValidationError);
    }
    SUBCASE("parse errors carry line numbers")
    {
        const std::string missing_unit = std::string(kMinimal) + "margin 5\n";
        CHECK(KindOf([&] { ParseScenario(missing_unit); }) == ErrorKind::ParseError);
        CHECK(MessageOf([&] { ParseScenario(missing_unit, "m.scn"); }).find("m.scn:6") !=
              std::string::npos);
        CHECK(KindOf([&] { ParseScenario(std::string(kMinimal) + "bogus 1\n"); }) ==
              ErrorKind::ParseError);
        CHECK(KindOf([&] { ParseScenario("schedulers tsgs\n"); }) == ErrorKind::ParseError);
        CHECK(KindOf([&] { ParseScenario("format other/9\n"); }) == ErrorKind::ParseError);
        CHECK(KindOf([&] { ParseScenario(std::string(kMinimal) + "schedulers greedy\n"); }) ==
              ErrorKind::ParseError);
    }
    SUBCASE("missing file")
    {
        CHECK(KindOf([] { LoadScenario("/nonexistent/none.scn"); }) == ErrorKind::IoError);
    }
}

TEST_CASE("request airtime defaults to the channel's")
{
    const std::string text = "format ovsched-scenario/1\nschedulers tsgs\nstep 1us\nseeds 1\n"
                             "request id=0 deadline=1ms packets=2\n"
                             "channel packet_airtime=40us\n";
    CHECK(ParseScenario(text).requests[0].packet_airtime == 40_us);
}

TEST_CASE("sweep rescales deadlines to the requested window")
{
    const ScenarioSpec spec = LoadScenario(kTable2);
    const auto moved = WithWindow(spec.requests, 6560_us, spec.scheduler_config.margin);
    for (const auto& r : moved)
    {
        CHECK(Window(r, spec.scheduler_config.margin) == 6560_us);
        CHECK(r.packet_count == 50);
    }
}

TEST_CASE("row accounting and internal consistency")
{
    ScenarioSpec spec = LoadScenario(kTable2);
    spec.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s)
    {
        spec.seeds.push_back(s);
    }
    const SweepTable table = RunExperiment(spec);
    CHECK(table.rows.size() == 10 * 2 * 20);
    CHECK(table.aggregates.size() == 10 * 2);
    CHECK(Lines(Csv(table)) == 1 + 400 + 20);

    for (const SweepRow& row : table.rows)
    {
        std::int64_t received = 0;
        std::int64_t sent = 0;
        for (std::size_t c = 0; c < table.Connections(); ++c)
        {
            received += row.received[c];
            sent += table.sent[c];
        }
        CHECK(row.pdr == static_cast<double>(received) / static_cast<double>(sent));
        if (row.scheduler == Strategy::Tsgs && row.cost_us == 0)
        {
            for (auto c : row.collisions)
            {
                CHECK(c == 0);
            }
        }
    }
    // Ordered by window, then scheduler as listed, then seed as listed.
    for (std::size_t i = 1; i < table.rows.size(); ++i)
    {
        CHECK(table.rows[i - 1].window_us <= table.rows[i].window_us);
    }
    CHECK(table.rows[0].scheduler == Strategy::Tsgs);
    CHECK(table.rows[20].scheduler == Strategy::Random);
}

TEST_CASE("a window of twice the summed durations gives tsgs zero collisions")
{
    ScenarioSpec spec = LoadScenario(kTable2);
    spec.schedulers = {Strategy::Tsgs};
    TimeSpan total;
    for (const auto& r : spec.requests)
    {
        total += NominalDuration(r);
    }
    spec.sweep = WindowSweep{total * 2, total * 2, 1_us};
    const SweepTable table = RunExperiment(spec);
    REQUIRE(table.aggregates.size() == 1);
    for (double c : table.aggregates[0].collisions)
    {
        CHECK(c == 0.0);
    }
}

TEST_CASE("exhaustive over a 29 x 29 grid")
{
    ScenarioSpec spec = LoadScenario(kTable2);
    spec.schedulers = {Strategy::Exhaustive};
    spec.seeds = {1};
    for (auto& r : spec.requests)
    {
        r.per_packet_overhead = 0_us; // 1150 us trains
    }
    spec.sweep = WindowSweep{32'800_us, 32'800_us, 1_us};
    const SweepTable table = RunExperiment(spec);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].candidate_evals == 29 * 29);
}

TEST_CASE("instance-too-large propagates")
{
    ScenarioSpec spec = LoadScenario(kTable2);
    spec.schedulers = {Strategy::Exhaustive};
    spec.scheduler_config.step = 1_us;
    spec.scheduler_config.enumeration_cap = 1000;
    CHECK(KindOf([&] { RunExperiment(spec); }) == ErrorKind::InstanceTooLarge);
}

TEST_CASE("emit")
{
    SweepTable empty;
    empty.sent = {50, 50};
    const std::string header = Csv(empty);
    CHECK(header ==
          "window_us,scheduler,seed,pdr,cost_us,candidate_evals,collisions_c0,collisions_c1,"
          "received_c0,received_c1,mean_delay_us\n");

    SweepTable t;
    t.sent = {50, 50};
    for (int i = 0; i < 400; ++i)
    {
        t.rows.push_back({3280, Strategy::Random, static_cast<std::uint64_t>(i), 0.8, 10, 0,
                          {1, 1}, {40, 40}, 12.5});
    }
    CHECK(Lines(Csv(t)) == 401);
    CHECK(Csv(t).find("\n3280,random,0,0.800000,10,0,1,1,40,40,12.500000\n") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "ovsched_emit_test";
    std::filesystem::create_directories(dir);
    Emit(t, OutputFormat::Csv, dir / "a.csv");
    Emit(t, OutputFormat::Csv, dir / "b.csv");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(KindOf([&] { Emit(t, OutputFormat::Csv, dir / "missing" / "x.csv"); }) ==
          ErrorKind::IoError);
}

TEST_CASE("json round trip")
{
    ScenarioSpec spec = LoadScenario(kTable2);
    spec.seeds = {1, 2, 3};
    const SweepTable table = RunExperiment(spec);
    std::stringstream buf;
    WriteJson(table, buf);
    CHECK(ReadJson(buf) == table);

    std::stringstream junk("{\"format\": \"nope\"}");
    CHECK(KindOf([&] { ReadJson(junk); }) == ErrorKind::ParseError);
}

TEST_CASE("report_comparison")
{
    SweepTable t;
    t.sent = {10};
    for (int i = 0; i < 5; ++i)
    {
        t.rows.push_back({100, Strategy::Tsgs, static_cast<std::uint64_t>(i), 1.0, 0, 0, {0}, {10}, 0});
        t.rows.push_back({100, Strategy::Random, static_cast<std::uint64_t>(i), 0.8, 5, 0, {2}, {8}, 4});
    }
    const auto summary = ReportComparison(t);
    REQUIRE(summary.tsgs_minus_random_pdr);
    CHECK(*summary.tsgs_minus_random_pdr == doctest::Approx(0.20));
    REQUIRE(summary.schedulers.size() == 2);
    CHECK(summary.schedulers[1].mean_collisions == 2.0);
    CHECK(summary.schedulers[1].mean_delay_us == 4.0);

    SweepTable single;
    single.sent = {10};
    single.rows.push_back({100, Strategy::Tsgs, 1, 1.0, 0, 0, {0}, {10}, 0});
    CHECK(KindOf([&] { ReportComparison(single); }) == ErrorKind::MissingScheduler);
}

TEST_CASE("table II run: tsgs beats random and output is reproducible")
{
    const ScenarioSpec spec = LoadScenario(kTable2);
    const SweepTable a = RunExperiment(spec);
    const SweepTable b = RunExperiment(spec);
    CHECK(Csv(a) == Csv(b));
    const auto summary = ReportComparison(a);
    REQUIRE(summary.tsgs_minus_random_pdr);
    CHECK(*summary.tsgs_minus_random_pdr > 0.0);
}
