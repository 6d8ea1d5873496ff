#include "binode/serialize.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace binode {

using nlohmann::json;

namespace {

json spec_to_json(const NnpSpec& s) {
    json j;
    j["input_mask"] = s.input_mask;
    j["hidden_layers"] = s.hidden_layers;
    j["hidden_width"] = s.hidden_width;
    j["hidden_activation"] = s.hidden_activation == Activation::elu ? "elu" : "relu";
    switch (s.output_activation) {
        case OutputActivation::softplus: j["output_activation"] = "softplus"; break;
        case OutputActivation::relu: j["output_activation"] = "relu"; break;
        default: j["output_activation"] = "identity";
    }
    if (!s.monotone_constraint.empty()) j["monotone_constraint"] = s.monotone_constraint;
    if (!s.input_scale.empty()) j["input_scale"] = s.input_scale;
    return j;
}

NnpSpec spec_from_json(const json& j) {
    NnpSpec s;
    s.input_mask = j.at("input_mask").get<std::vector<bool>>();
    s.hidden_layers = j.at("hidden_layers").get<int>();
    s.hidden_width = j.at("hidden_width").get<int>();
    const std::string ha = j.at("hidden_activation").get<std::string>();
    if (ha == "elu")
        s.hidden_activation = Activation::elu;
    else if (ha == "relu")
        s.hidden_activation = Activation::relu;
    else
        throw ConfigError("unknown hidden_activation: '" + ha + "'");
    const std::string oa = j.at("output_activation").get<std::string>();
    if (oa == "softplus")
        s.output_activation = OutputActivation::softplus;
    else if (oa == "relu")
        s.output_activation = OutputActivation::relu;
    else if (oa == "identity")
        s.output_activation = OutputActivation::identity;
    else
        throw ConfigError("unknown output_activation: '" + oa + "'");
    if (j.contains("monotone_constraint"))
        s.monotone_constraint = j.at("monotone_constraint").get<std::vector<bool>>();
    if (j.contains("input_scale"))
        s.input_scale = j.at("input_scale").get<std::vector<double>>();
    s.validate();
    return s;
}

json nnp_to_json_obj(const Nnp& n) {
    json j;
    j["spec"] = spec_to_json(n.spec);
    j["params"] = collect_nnp_parameters(n);
    j["output_scale"] = n.output_scale;
    j["seed"] = n.seed;
    return j;
}

Nnp nnp_from_json_obj(const json& j) {
    Nnp n;
    n.spec = spec_from_json(j.at("spec"));
    n.seed = j.value("seed", std::uint64_t{0});
    n.output_scale = j.value("output_scale", 1.0);
    n = [&] {  // allocate layer storage via init, then overwrite
        Nnp fresh = init_nnp(n.spec, n.seed);
        fresh.output_scale = n.output_scale;
        return fresh;
    }();
    const auto flat = j.at("params").get<std::vector<double>>();
    assign_nnp_parameters(n, flat);
    return n;
}

const char* sign_name(SignConstraint s) {
    switch (s) {
        case SignConstraint::nonnegative: return "nonnegative";
        case SignConstraint::nonpositive: return "nonpositive";
        default: return "free";
    }
}

SignConstraint sign_from_name(const std::string& s) {
    if (s == "free") return SignConstraint::free_sign;
    if (s == "nonnegative") return SignConstraint::nonnegative;
    if (s == "nonpositive") return SignConstraint::nonpositive;
    throw ConfigError("unknown sign constraint: '" + s + "'");
}

json fixed_term_to_json(const FixedTerm& ft) {
    json j;
    j["id"] = to_string(ft.kind);
    j["scale"] = ft.scale;
    j["params"] = ft.params;
    if (ft.index >= 0) j["index"] = ft.index;
    if (ft.index2 >= 0) j["index2"] = ft.index2;
    if (!ft.schedule.empty()) j["schedule"] = ft.schedule;
    return j;
}

FixedTerm fixed_term_from_json(const json& j) {
    FixedTerm ft;
    ft.kind = fixed_term_kind_from_string(j.at("id").get<std::string>());
    ft.scale = j.value("scale", 1.0);
    ft.params = j.at("params").get<std::map<std::string, double>>();
    ft.index = j.value("index", -1);
    ft.index2 = j.value("index2", -1);
    if (j.contains("schedule"))
        ft.schedule = j.at("schedule").get<std::vector<std::pair<double, double>>>();
    return ft;
}

}  // namespace

std::string nnp_to_json(const Nnp& n) { return nnp_to_json_obj(n).dump(2) + "\n"; }

Nnp nnp_from_json(const std::string& text) {
    try {
        return nnp_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("nnp file: ") + e.what());
    }
}

std::string model_to_json(const BinodeModel& m) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["n"] = m.n;
    j["state_names"] = m.state_names;
    j["state_units"] = m.state_units;
    json procs = json::array();
    for (const Nnp& p : m.processes) procs.push_back(nnp_to_json_obj(p));
    j["processes"] = procs;
    json w;
    w["rows"] = m.stoich.rows;
    w["cols"] = m.stoich.cols;
    w["raw"] = m.stoich.raw;
    w["structural_mask"] = m.stoich.structural_mask;
    w["trainable"] = m.stoich.trainable;
    std::vector<std::string> signs;
    signs.reserve(m.stoich.sign.size());
    for (SignConstraint s : m.stoich.sign) signs.emplace_back(sign_name(s));
    w["sign"] = signs;
    j["stoich"] = w;
    json terms = json::array();
    for (const auto& row : m.fixed_terms) {
        json jr = json::array();
        for (const FixedTerm& ft : row) jr.push_back(fixed_term_to_json(ft));
        terms.push_back(jr);
    }
    j["fixed_terms"] = terms;
    if (!m.trained_domain.empty()) j["trained_domain"] = m.trained_domain;
    return j.dump(2) + "\n";
}

BinodeModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ConfigError("model file: unsupported format_version " +
                              std::to_string(version));
        BinodeModel m;
        m.n = j.at("n").get<int>();
        m.state_names = j.value("state_names", std::vector<std::string>{});
        m.state_units = j.value("state_units", std::vector<std::string>{});
        for (const json& p : j.at("processes")) m.processes.push_back(nnp_from_json_obj(p));
        const json& w = j.at("stoich");
        m.stoich.rows = w.at("rows").get<int>();
        m.stoich.cols = w.at("cols").get<int>();
        m.stoich.raw = w.at("raw").get<std::vector<double>>();
        m.stoich.structural_mask = w.at("structural_mask").get<std::vector<bool>>();
        m.stoich.trainable = w.at("trainable").get<std::vector<bool>>();
        for (const std::string& s : w.at("sign").get<std::vector<std::string>>())
            m.stoich.sign.push_back(sign_from_name(s));
        for (const json& row : j.at("fixed_terms")) {
            std::vector<FixedTerm> terms;
            for (const json& ft : row) terms.push_back(fixed_term_from_json(ft));
            m.fixed_terms.push_back(std::move(terms));
        }
        if (j.contains("trained_domain"))
            m.trained_domain =
                j.at("trained_domain").get<std::vector<std::pair<double, double>>>();
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model file: ") + e.what());
    }
}

void save_model(const BinodeModel& m, const std::filesystem::path& path) {
    atomic_write(path, model_to_json(m));
}

BinodeModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_file(path));
}

void save_nnp(const Nnp& n, const std::filesystem::path& path) {
    atomic_write(path, nnp_to_json(n));
}

Nnp load_nnp(const std::filesystem::path& path) {
    return nnp_from_json(read_file(path));
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "t";
    for (int i = 0; i < t.dim(); ++i) {
        const std::string name =
            i < static_cast<int>(t.names.size()) ? t.names[i] : "x" + std::to_string(i + 1);
        out << "," << name;
    }
    out << "\n";
    for (std::size_t r = 0; r < t.size(); ++r) {
        out << format_value(t.times[r]);
        for (double v : t.states[r]) out << "," << format_value(v);
        out << "\n";
    }
    atomic_write(path, out.str());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file: " + path.string());
    Trajectory t;
    std::string line;
    if (!std::getline(in, line))
        throw IoError("empty trajectory file: " + path.string());
    {
        std::stringstream header(line);
        std::string cell;
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (!first) t.names.push_back(cell);
            first = false;
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
        if (values.size() != t.names.size() + 1)
            throw IoError("ragged trajectory row in " + path.string());
        t.times.push_back(values[0]);
        t.states.emplace_back(values.begin() + 1, values.end());
    }
    t.validate();
    return t;
}

void write_loss_csv(std::span<const double> history,
                    const std::filesystem::path& path) {
    std::ostringstream out;
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i << "," << format_value(history[i]) << "\n";
    atomic_write(path, out.str());
}

void write_sweep_csv(std::span<const SweepCell> cells,
                     const std::filesystem::path& path) {
    std::ostringstream out;
    out << "layers,width,best_loss,mean_runtime_s\n";
    for (const SweepCell& c : cells)
        out << c.layers << "," << c.width << "," << format_value(c.best_loss) << ","
            << format_value(c.mean_runtime_s) << "\n";
    atomic_write(path, out.str());
}

void write_surface_csv(const ProcessSurface& s, const std::filesystem::path& path,
                       std::span<const double> reference) {
    if (!reference.empty() && reference.size() != s.values.size())
        throw std::invalid_argument("surface csv: reference length mismatch");
    std::ostringstream out;
    out << "# process: " << s.process << "\n";
    out << "# row: " << s.row << "\n";
    out << "# weight: " << format_value(s.weight) << "\n";
    out << "# fixed:";
    for (std::size_t i = 0; i < s.fixed_state.size(); ++i) {
        bool is_axis = false;
        for (int a : s.axes) is_axis |= (static_cast<int>(i) == a);
        if (!is_axis) out << " x" << (i + 1) << "=" << format_value(s.fixed_state[i]);
    }
    out << "\n";
    const bool two_d = s.axes.size() == 2;
    out << (two_d ? "x1,x2,value" : "x,value");
    if (!reference.empty()) out << ",reference";
    out << "\n";
    const std::size_t n1 = two_d ? s.grid[1].size() : 1;
    for (std::size_t idx = 0; idx < s.values.size(); ++idx) {
        const std::size_t i = idx / n1, j = idx % n1;
        out << format_value(s.grid[0][i]);
        if (two_d) out << "," << format_value(s.grid[1][j]);
        out << "," << format_value(s.values[idx]);
        if (!reference.empty()) out << "," << format_value(reference[idx]);
        out << "\n";
    }
    atomic_write(path, out.str());
}

// ---------------------------------------------------------------------------
// files + hashing
// ---------------------------------------------------------------------------

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp.string());
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

// Minimal SHA-1 (FIPS 180-1), enough for content hashes of small text files.
struct Sha1 {
    std::uint32_t h[5] = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u,
                          0xC3D2E1F0u};

    static std::uint32_t rol(std::uint32_t x, int s) {
        return (x << s) | (x >> (32 - s));
    }

    void block(const unsigned char* p) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 80; ++i)
            w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const std::uint32_t tmp = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = tmp;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
    }

    std::string digest(const std::string& msg) {
        std::string data = msg;
        const std::uint64_t bits = std::uint64_t(msg.size()) * 8;
        data.push_back(static_cast<char>(0x80));
        while (data.size() % 64 != 56) data.push_back('\0');
        for (int i = 7; i >= 0; --i)
            data.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
        for (std::size_t i = 0; i < data.size(); i += 64)
            block(reinterpret_cast<const unsigned char*>(data.data() + i));
        char out[41];
        std::snprintf(out, sizeof(out), "%08x%08x%08x%08x%08x", h[0], h[1], h[2], h[3],
                      h[4]);
        return out;
    }
};

}  // namespace

std::string git_blob_sha1(const std::string& content) {
    std::string blob = "blob " + std::to_string(content.size());
    blob.push_back('\0');
    blob += content;
    return Sha1{}.digest(blob);
}

}  // namespace binode
