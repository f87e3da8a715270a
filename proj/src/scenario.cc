#include "ovsched/scenario.h"

#include "ovsched/error.h"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace ovsched {

std::vector<TimeSpan>
WindowSweep::Points() const
{
    std::vector<TimeSpan> out;
    for (TimeSpan w = start; w <= stop; w += step)
    {
        out.push_back(w);
    }
    return out;
}

std::optional<TimeSpan>
ParseTime(std::string_view text)
{
    std::int64_t scale = 0;
    std::string_view number;
    if (text.ends_with("us"))
    {
        scale = 1;
        number = text.substr(0, text.size() - 2);
    }
    else if (text.ends_with("ms"))
    {
        scale = 1'000;
        number = text.substr(0, text.size() - 2);
    }
    else if (text.ends_with("s"))
    {
        scale = 1'000'000;
        number = text.substr(0, text.size() - 1);
    }
    else
    {
        return std::nullopt;
    }

    const auto dot = number.find('.');
    const std::string_view whole = number.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? "" : number.substr(dot + 1);
    if (whole.empty() || (dot != std::string_view::npos && frac.empty()))
    {
        return std::nullopt;
    }

    std::int64_t value = 0;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), value);
    if (ec != std::errc{} || p != whole.data() + whole.size() || value < 0)
    {
        return std::nullopt;
    }
    if (__builtin_mul_overflow(value, scale, &value))
    {
        return std::nullopt;
    }
    // Fractional digits must resolve to whole microseconds.
    std::int64_t place = scale;
    for (char c : frac)
    {
        if (c < '0' || c > '9')
        {
            return std::nullopt;
        }
        const std::int64_t digit = c - '0';
        if (place % 10 != 0)
        {
            if (digit != 0)
            {
                return std::nullopt;
            }
            continue;
        }
        place /= 10;
        value += digit * place;
    }
    return TimeSpan(value);
}

std::vector<TransmissionRequest>
WithWindow(std::span<const TransmissionRequest> requests, TimeSpan window, TimeSpan margin)
{
    std::vector<TransmissionRequest> out(requests.begin(), requests.end());
    for (auto& r : out)
    {
        r.deadline = TimePoint{} + NominalDuration(r) + margin + window;
    }
    return out;
}

namespace {

class ScenarioParser
{
  public:
    ScenarioParser(std::string_view text, const std::string& source)
        : m_text(text),
          m_source(source)
    {
    }

    ScenarioSpec Parse()
    {
        std::istringstream in{std::string(m_text)};
        std::string raw;
        while (std::getline(in, raw))
        {
            ++m_line;
            const auto hash = raw.find('#');
            if (hash != std::string::npos)
            {
                raw.erase(hash);
            }
            std::istringstream words(raw);
            std::vector<std::string> tokens;
            for (std::string w; words >> w;)
            {
                tokens.push_back(w);
            }
            if (!tokens.empty())
            {
                Directive(tokens);
            }
        }
        if (!m_saw_format)
        {
            m_line = 0;
            Fail(ErrorKind::ParseError, "missing 'format " + std::string(kScenarioFormat) + "' line");
        }
        Finalize();
        return std::move(m_spec);
    }

  private:
    [[noreturn]] void Fail(ErrorKind kind, const std::string& what) const
    {
        std::string where = m_source;
        if (m_line > 0)
        {
            where += ":" + std::to_string(m_line);
        }
        throw Error(kind, where + ": " + what);
    }

    void Directive(const std::vector<std::string>& t)
    {
        const std::string& key = t[0];
        if (!m_saw_format && key != "format")
        {
            Fail(ErrorKind::ParseError, "first directive must be 'format'");
        }
        if (key == "format")
        {
            Expect(t, 2);
            if (t[1] != kScenarioFormat)
            {
                Fail(ErrorKind::ParseError, "unsupported format '" + t[1] + "', expected " +
                                                std::string(kScenarioFormat));
            }
            m_saw_format = true;
        }
        else if (key == "schedulers")
        {
            if (t.size() < 2)
            {
                Fail(ErrorKind::ParseError, "'schedulers' needs at least one name");
            }
            for (std::size_t i = 1; i < t.size(); ++i)
            {
                const auto s = ParseStrategy(t[i]);
                if (!s)
                {
                    Fail(ErrorKind::ParseError, "unknown scheduler '" + t[i] + "'");
                }
                m_spec.schedulers.push_back(*s);
            }
        }
        else if (key == "step")
        {
            Expect(t, 2);
            m_spec.scheduler_config.step = Time("step", t[1]);
        }
        else if (key == "margin")
        {
            Expect(t, 2);
            m_spec.scheduler_config.margin = Time("margin", t[1]);
        }
        else if (key == "ordering")
        {
            Expect(t, 2);
            const auto o = ParseOrdering(t[1]);
            if (!o)
            {
                Fail(ErrorKind::ParseError, "unknown ordering '" + t[1] + "'");
            }
            m_spec.scheduler_config.ordering = *o;
        }
        else if (key == "enumeration_cap")
        {
            Expect(t, 2);
            m_spec.scheduler_config.enumeration_cap = Unsigned("enumeration_cap", t[1]);
        }
        else if (key == "seeds")
        {
            for (std::size_t i = 1; i < t.size(); ++i)
            {
                m_spec.seeds.push_back(Unsigned("seed", t[i]));
            }
        }
        else if (key == "channel")
        {
            const auto kv = Pairs(t, {"slot_time", "aifs", "cw", "packet_airtime", "ambient_loss",
                                      "deadline_accounting"});
            ChannelConfig& c = m_spec.channel;
            if (kv.contains("slot_time"))
            {
                c.slot_time = Time("slot_time", kv.at("slot_time"));
            }
            if (kv.contains("aifs"))
            {
                c.aifs = Time("aifs", kv.at("aifs"));
            }
            if (kv.contains("cw"))
            {
                c.cw = static_cast<std::int64_t>(Unsigned("cw", kv.at("cw")));
            }
            if (kv.contains("packet_airtime"))
            {
                c.packet_airtime = Time("packet_airtime", kv.at("packet_airtime"));
            }
            if (kv.contains("ambient_loss"))
            {
                c.ambient_loss_rate = Probability("ambient_loss", kv.at("ambient_loss"));
            }
            if (kv.contains("deadline_accounting"))
            {
                c.deadline_accounting = Bool("deadline_accounting", kv.at("deadline_accounting"));
            }
            m_channel_line = m_line;
        }
        else if (key == "sweep")
        {
            const auto kv = Pairs(t, {"start", "stop", "step"});
            for (const char* k : {"start", "stop", "step"})
            {
                if (!kv.contains(k))
                {
                    Fail(ErrorKind::ParseError, std::string("sweep is missing '") + k + "'");
                }
            }
            m_spec.sweep = WindowSweep{Time("start", kv.at("start")), Time("stop", kv.at("stop")),
                                       Time("step", kv.at("step"))};
            m_sweep_line = m_line;
        }
        else if (key == "request")
        {
            const auto kv = Pairs(t, {"id", "deadline", "packets", "airtime", "overhead"});
            for (const char* k : {"id", "deadline", "packets"})
            {
                if (!kv.contains(k))
                {
                    Fail(ErrorKind::ParseError, std::string("request is missing '") + k + "'");
                }
            }
            TransmissionRequest r;
            r.id = Unsigned("id", kv.at("id"));
            r.deadline = TimePoint{} + Time("deadline", kv.at("deadline"));
            r.packet_count = static_cast<std::int64_t>(Unsigned("packets", kv.at("packets")));
            if (kv.contains("overhead"))
            {
                r.per_packet_overhead = Time("overhead", kv.at("overhead"));
            }
            m_request_airtime.push_back(kv.contains("airtime")
                                            ? std::optional(Time("airtime", kv.at("airtime")))
                                            : std::nullopt);
            m_request_lines.push_back(m_line);
            m_spec.requests.push_back(r);
        }
        else
        {
            Fail(ErrorKind::ParseError, "unknown directive '" + key + "'");
        }
    }

    void Finalize()
    {
        for (std::size_t i = 0; i < m_spec.requests.size(); ++i)
        {
            m_spec.requests[i].packet_airtime =
                m_request_airtime[i].value_or(m_spec.channel.packet_airtime);
        }

        auto at = [&](int line, ErrorKind kind, const std::string& what) {
            m_line = line;
            Fail(kind, what);
        };

        for (std::size_t i = 0; i < m_spec.requests.size(); ++i)
        {
            const auto& r = m_spec.requests[i];
            if (r.id != i)
            {
                at(m_request_lines[i], ErrorKind::ValidationError,
                   "request " + std::to_string(r.id) + ": ids must be 0, 1, ... in file order");
            }
            try
            {
                (void)Window(r, m_spec.scheduler_config.margin);
            }
            catch (const Error& e)
            {
                at(m_request_lines[i], ErrorKind::ValidationError, e.what());
            }
        }
        try
        {
            ValidateChannel(m_spec.channel);
        }
        catch (const Error& e)
        {
            at(m_channel_line, ErrorKind::ValidationError, e.what());
        }
        if (m_spec.sweep)
        {
            if (m_spec.sweep->step.IsZero())
            {
                at(m_sweep_line, ErrorKind::ValidationError, "sweep step must be positive");
            }
            if (m_spec.sweep->start > m_spec.sweep->stop)
            {
                at(m_sweep_line, ErrorKind::ValidationError, "sweep start exceeds stop");
            }
        }
        try
        {
            ValidateScenario(m_spec);
        }
        catch (const Error& e)
        {
            at(0, ErrorKind::ValidationError, e.what());
        }
    }

    void Expect(const std::vector<std::string>& t, std::size_t n) const
    {
        if (t.size() != n)
        {
            Fail(ErrorKind::ParseError,
                 "'" + t[0] + "' takes " + std::to_string(n - 1) + " argument(s)");
        }
    }

    std::map<std::string, std::string> Pairs(const std::vector<std::string>& t,
                                             std::initializer_list<std::string_view> allowed) const
    {
        std::map<std::string, std::string> out;
        for (std::size_t i = 1; i < t.size(); ++i)
        {
            const auto eq = t[i].find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == t[i].size())
            {
                Fail(ErrorKind::ParseError, "expected key=value, got '" + t[i] + "'");
            }
            std::string k = t[i].substr(0, eq);
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            {
                Fail(ErrorKind::ParseError, "'" + t[0] + "' does not take '" + k + "'");
            }
            if (!out.emplace(k, t[i].substr(eq + 1)).second)
            {
                Fail(ErrorKind::ParseError, "'" + k + "' given twice");
            }
        }
        return out;
    }

    TimeSpan Time(const std::string& field, const std::string& text) const
    {
        const auto t = ParseTime(text);
        if (!t)
        {
            Fail(ErrorKind::ParseError,
                 field + ": '" + text + "' is not a time with unit us, ms or s (whole microseconds)");
        }
        return *t;
    }

    std::uint64_t Unsigned(const std::string& field, const std::string& text) const
    {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size())
        {
            Fail(ErrorKind::ParseError, field + ": '" + text + "' is not a non-negative integer");
        }
        return v;
    }

    double Probability(const std::string& field, const std::string& text) const
    {
        double v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size() || !(v >= 0.0 && v <= 1.0))
        {
            Fail(ErrorKind::ParseError, field + ": '" + text + "' is not a probability in [0, 1]");
        }
        return v;
    }

    bool Bool(const std::string& field, const std::string& text) const
    {
        if (text == "true")
        {
            return true;
        }
        if (text == "false")
        {
            return false;
        }
        Fail(ErrorKind::ParseError, field + ": expected true or false");
    }

    std::string_view m_text;
    std::string m_source;
    int m_line = 0;
    bool m_saw_format = false;
    int m_channel_line = 0;
    int m_sweep_line = 0;
    std::vector<int> m_request_lines;
    std::vector<std::optional<TimeSpan>> m_request_airtime;
    ScenarioSpec m_spec;
};

} // namespace

ScenarioSpec
ParseScenario(std::string_view text, const std::string& source)
{
    return ScenarioParser(text, source).Parse();
}

ScenarioSpec
LoadScenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorKind::IoError, "cannot open scenario '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return ParseScenario(buf.str(), path.string());
}

void
ValidateScenario(const ScenarioSpec& spec)
{
    if (spec.requests.empty())
    {
        throw Error(ErrorKind::ValidationError, "scenario has no requests");
    }
    if (spec.seeds.empty())
    {
        throw Error(ErrorKind::ValidationError, "scenario has no seeds");
    }
    if (spec.schedulers.empty())
    {
        throw Error(ErrorKind::ValidationError, "scenario names no schedulers");
    }
    if (spec.scheduler_config.step.IsZero())
    {
        throw Error(ErrorKind::ValidationError, "step must be positive");
    }
    for (std::size_t i = 0; i < spec.requests.size(); ++i)
    {
        if (spec.requests[i].id != i)
        {
            throw Error(ErrorKind::ValidationError, "request ids must be dense and in order");
        }
        try
        {
            (void)Window(spec.requests[i], spec.scheduler_config.margin);
        }
        catch (const Error& e)
        {
            throw Error(ErrorKind::ValidationError, e.what());
        }
    }
    try
    {
        ValidateChannel(spec.channel);
    }
    catch (const Error& e)
    {
        throw Error(ErrorKind::ValidationError, e.what());
    }
    if (spec.sweep && (spec.sweep->step.IsZero() || spec.sweep->start > spec.sweep->stop))
    {
        throw Error(ErrorKind::ValidationError, "sweep needs a positive step and start <= stop");
    }
}

} // namespace ovsched
