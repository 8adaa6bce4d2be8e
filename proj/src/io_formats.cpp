#include "oomcraft/io_formats.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace oomcraft {

namespace fs = std::filesystem;

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double parse_real(const std::string& token, const std::string& context) {
    if (token.empty()) throw IoError(context + ": empty numeric field");
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end != begin + token.size())
        throw IoError(context + ": bad numeric literal '" + token + "'");
    if (!std::isfinite(v)) throw IoError(context + ": non-finite literal '" + token + "'");
    return v;
}

namespace {

long parse_long(const std::string& token, const std::string& context) {
    if (token.empty()) throw IoError(context + ": empty integer field");
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    long v = std::strtol(begin, &end, 10);
    if (end != begin + token.size() || errno == ERANGE)
        throw IoError(context + ": bad integer literal '" + token + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

class LineReader {
public:
    explicit LineReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open " + path.string());
    }

    std::optional<std::string> next() {
        std::string line;
        if (!std::getline(in_, line)) return std::nullopt;
        ++lineno_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << path_.string() << ":" << lineno_ << ": " << what;
        throw IoError(msg.str());
    }

    int lineno() const { return lineno_; }

private:
    fs::path path_;
    std::ifstream in_;
    int lineno_ = 0;
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' endings on every platform
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void write_vector_line(std::ofstream& out, const Eigen::Ref<const Vector>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        out << format_real(v(i));
    }
    out << '\n';
}

Vector parse_vector(const std::string& line, const std::string& context) {
    std::istringstream in(line);
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) vals.push_back(parse_real(tok, context));
    Vector v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i];
    return v;
}

} // namespace

void write_trajectory_discrete(const fs::path& path, const std::vector<int>& traj) {
    std::ofstream out = open_out(path);
    out << "#oomcraft-traj v1 kind=discrete dim=1\n";
    for (int s : traj) {
        if (s < 0) throw InvalidInputError("write_trajectory_discrete: negative symbol");
        out << s << '\n';
    }
}

void write_trajectory_continuous(const fs::path& path, const Matrix& traj) {
    ensure_finite(traj, "write_trajectory_continuous");
    std::ofstream out = open_out(path);
    out << "#oomcraft-traj v1 kind=continuous dim=" << traj.cols() << '\n';
    for (long t = 0; t < traj.rows(); ++t) {
        for (long j = 0; j < traj.cols(); ++j) {
            if (j) out << ',';
            out << format_real(traj(t, j));
        }
        out << '\n';
    }
}

namespace {

struct TrajHeader {
    ObsKind kind;
    int dim;
};

TrajHeader parse_traj_header(LineReader& reader) {
    auto line = reader.next();
    if (!line) reader.fail("empty trajectory file");
    std::istringstream in(*line);
    std::string magic, version, kind_kv, dim_kv;
    in >> magic >> version >> kind_kv >> dim_kv;
    if (magic != "#oomcraft-traj" || version != "v1")
        reader.fail("expected '#oomcraft-traj v1' header");
    if (kind_kv.rfind("kind=", 0) != 0 || dim_kv.rfind("dim=", 0) != 0)
        reader.fail("malformed trajectory header");
    TrajHeader h;
    std::string kind = kind_kv.substr(5);
    if (kind == "discrete")
        h.kind = ObsKind::Discrete;
    else if (kind == "continuous")
        h.kind = ObsKind::Continuous;
    else
        reader.fail("unknown trajectory kind '" + kind + "'");
    h.dim = static_cast<int>(parse_long(dim_kv.substr(4), "trajectory dim"));
    if (h.dim < 1) reader.fail("trajectory dim must be >= 1");
    if (h.kind == ObsKind::Discrete && h.dim != 1) reader.fail("discrete trajectories have dim=1");
    return h;
}

} // namespace

fs::path write_dataset(const TrajectoryDataset& data, const fs::path& dir, const std::string& stem) {
    fs::create_directories(dir);
    fs::path manifest = dir / (stem + ".manifest");
    std::ofstream out = open_out(manifest);
    out << "#oomcraft-manifest v1\n";
    for (const auto& [key, value] : data.meta) out << "meta." << key << '=' << value << '\n';
    if (data.kind == ObsKind::Discrete && data.meta.find("alphabet_size") == data.meta.end())
        out << "meta.alphabet_size=" << data.alphabet_size << '\n';

    const std::size_t n = data.num_trajectories();
    for (std::size_t i = 0; i < n; ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%06zu.txt", stem.c_str(), i);
        if (data.kind == ObsKind::Discrete)
            write_trajectory_discrete(dir / name, data.discrete[i]);
        else
            write_trajectory_continuous(dir / name, data.continuous[i]);
        out << name << '\n';
    }
    return manifest;
}

TrajectoryDataset read_dataset(const fs::path& manifest_path) {
    LineReader reader(manifest_path);
    auto header = reader.next();
    if (!header || strip(*header) != "#oomcraft-manifest v1")
        reader.fail("expected '#oomcraft-manifest v1' header");

    TrajectoryDataset data;
    bool kind_known = false;
    const fs::path dir = manifest_path.parent_path();

    for (auto line = reader.next(); line; line = reader.next()) {
        std::string text = strip(*line);
        if (text.empty()) reader.fail("blank line in manifest");
        if (text.rfind("meta.", 0) == 0) {
            std::size_t eq = text.find('=');
            if (eq == std::string::npos) reader.fail("meta line without '='");
            data.meta[text.substr(5, eq - 5)] = text.substr(eq + 1);
            continue;
        }
        fs::path traj_path = dir / text;
        if (!fs::exists(traj_path)) reader.fail("referenced trajectory missing: " + text);

        LineReader traj_reader(traj_path);
        TrajHeader h = parse_traj_header(traj_reader);
        if (!kind_known) {
            data.kind = h.kind;
            data.dim = h.dim;
            kind_known = true;
        } else if (h.kind != data.kind || h.dim != data.dim) {
            reader.fail("trajectory " + text + " disagrees with manifest kind/dim");
        }

        if (h.kind == ObsKind::Discrete) {
            std::vector<int> traj;
            for (auto rec = traj_reader.next(); rec; rec = traj_reader.next()) {
                std::string t = strip(*rec);
                if (t.empty()) traj_reader.fail("blank interior line");
                long s = parse_long(t, "symbol");
                if (s < 0) traj_reader.fail("negative symbol");
                traj.push_back(static_cast<int>(s));
            }
            data.discrete.push_back(std::move(traj));
        } else {
            std::vector<double> flat;
            long rows = 0;
            for (auto rec = traj_reader.next(); rec; rec = traj_reader.next()) {
                std::string t = strip(*rec);
                if (t.empty()) traj_reader.fail("blank interior line");
                auto fields = split(t, ',');
                if (static_cast<int>(fields.size()) != h.dim)
                    traj_reader.fail("record arity != dim");
                for (const auto& f : fields) flat.push_back(parse_real(strip(f), "observation"));
                ++rows;
            }
            Matrix m(rows, h.dim);
            for (long r = 0; r < rows; ++r)
                for (int c = 0; c < h.dim; ++c)
                    m(r, c) = flat[static_cast<std::size_t>(r) * h.dim + c];
            data.continuous.push_back(std::move(m));
        }
    }
    if (!kind_known) throw IoError(manifest_path.string() + ": manifest lists no trajectories");

    if (data.kind == ObsKind::Discrete) {
        int k = 0;
        auto it = data.meta.find("alphabet_size");
        if (it != data.meta.end())
            k = static_cast<int>(parse_long(it->second, "meta.alphabet_size"));
        for (const auto& traj : data.discrete)
            for (int s : traj) k = std::max(k, s + 1);
        data.alphabet_size = k;
    }
    auto it = data.meta.find("aborted");
    if (it != data.meta.end()) data.aborted = parse_long(it->second, "meta.aborted");
    return data;
}

void write_model(const SavedModel& model, const fs::path& path) {
    if (!model.oom.has_value() && !model.binless.has_value())
        throw InvalidInputError("write_model: empty model");
    std::ofstream out = open_out(path);
    out << "#oomcraft-model v1\n";
    out << "[header]\n";
    if (model.oom) {
        const Oom& m = *model.oom;
        out << "kind=oom\n";
        out << "m=" << m.dimension() << '\n';
        out << "K=" << m.alphabet_size() << '\n';
        out << "flavor=" << (m.flavor == OomFlavor::Equilibrium ? "equilibrium" : "plain") << '\n';
        out << "[omega]\n";
        write_vector_line(out, m.omega.transpose());
        out << "[sigma]\n";
        write_vector_line(out, m.sigma);
        for (int x = 0; x < m.alphabet_size(); ++x) {
            out << "[xi." << x << "]\n";
            for (int r = 0; r < m.dimension(); ++r)
                write_vector_line(out, m.xi[static_cast<std::size_t>(x)].row(r).transpose());
        }
    } else {
        const BinlessOom& b = *model.binless;
        out << "kind=binless\n";
        out << "m=" << b.dimension() << '\n';
        out << "d=" << b.obs_dim() << '\n';
        out << "flavor=equilibrium\n";
        out << "n=" << b.size() << '\n';
        out << "[omega]\n";
        write_vector_line(out, b.omega_eq.transpose());
        out << "[sigma]\n";
        write_vector_line(out, b.sigma);
        out << "[factors]\n";
        for (long n = 0; n < b.size(); ++n) {
            for (int j = 0; j < b.obs_dim(); ++j) {
                if (j) out << ',';
                out << format_real(b.sample_points(n, j));
            }
            out << " | ";
            for (int j = 0; j < b.dimension(); ++j) {
                if (j) out << ' ';
                out << format_real(b.left_factors(n, j));
            }
            out << " | ";
            for (int j = 0; j < b.dimension(); ++j) {
                if (j) out << ' ';
                out << format_real(b.right_factors(n, j));
            }
            out << '\n';
        }
    }

    if (model.bins) {
        out << "[bins]\n";
        for (const auto& dim_edges : model.bins->boundaries()) {
            Vector v(static_cast<Eigen::Index>(dim_edges.size()));
            for (std::size_t i = 0; i < dim_edges.size(); ++i)
                v(static_cast<Eigen::Index>(i)) = dim_edges[i];
            write_vector_line(out, v);
        }
    }

    out << "[featuremap]\n";
    if (model.indicator_map) {
        out << "type=indicator\n";
        out << "K=" << model.indicator_map->alphabet_size() << '\n';
        out << "L=" << model.indicator_map->window_len() << '\n';
    } else if (model.gaussian_map) {
        const GaussianRandomMap& g = *model.gaussian_map;
        out << "type=gaussian\n";
        out << "L=" << g.window_len() << '\n';
        out << "d=" << g.obs_dim() << '\n';
        out << "D=" << g.dimension() << '\n';
        out << "seed=" << g.seed() << '\n';
        out << "bandwidths=";
        write_vector_line(out, g.inverse_bandwidths());
        for (int j = 0; j < g.dimension(); ++j) {
            out << "center." << j << '=';
            write_vector_line(out, g.centers().row(j).transpose());
        }
    } else {
        out << "type=none\n";
    }
}

SavedModel read_model(const fs::path& path) {
    LineReader reader(path);
    auto first = reader.next();
    if (!first || strip(*first) != "#oomcraft-model v1")
        reader.fail("expected '#oomcraft-model v1' header");

    // read all remaining lines grouped into sections
    std::vector<std::pair<std::string, std::vector<std::string>>> sections;
    for (auto line = reader.next(); line; line = reader.next()) {
        std::string text = strip(*line);
        if (text.empty()) reader.fail("blank line in model file");
        if (text.front() == '[') {
            if (text.back() != ']') reader.fail("malformed section header");
            sections.emplace_back(text.substr(1, text.size() - 2), std::vector<std::string>{});
        } else {
            if (sections.empty()) reader.fail("content before first section");
            sections.back().second.push_back(text);
        }
    }

    auto find_section = [&](const std::string& name) -> const std::vector<std::string>* {
        for (const auto& [n, lines] : sections)
            if (n == name) return &lines;
        return nullptr;
    };
    auto need_section = [&](const std::string& name) -> const std::vector<std::string>& {
        const auto* s = find_section(name);
        if (!s) throw IoError(path.string() + ": missing [" + name + "] section");
        return *s;
    };

    std::map<std::string, std::string> header;
    for (const auto& line : need_section("header")) {
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path.string() + ": header line without '='");
        header[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need_key = [&](const std::string& key) -> const std::string& {
        auto it = header.find(key);
        if (it == header.end()) throw IoError(path.string() + ": header missing '" + key + "'");
        return it->second;
    };

    const std::string kind = need_key("kind");
    const int m = static_cast<int>(parse_long(need_key("m"), "header m"));
    SavedModel model;

    const auto& omega_lines = need_section("omega");
    const auto& sigma_lines = need_section("sigma");
    if (omega_lines.size() != 1 || sigma_lines.size() != 1)
        throw IoError(path.string() + ": omega/sigma must be single lines");
    Vector omega = parse_vector(omega_lines[0], "omega");
    Vector sigma = parse_vector(sigma_lines[0], "sigma");
    if (omega.size() != m || sigma.size() != m)
        throw IoError(path.string() + ": omega/sigma length != m");

    if (kind == "oom") {
        const int k = static_cast<int>(parse_long(need_key("K"), "header K"));
        Oom oom;
        oom.omega = omega.transpose();
        oom.sigma = sigma;
        const std::string flavor = need_key("flavor");
        if (flavor == "equilibrium")
            oom.flavor = OomFlavor::Equilibrium;
        else if (flavor == "plain")
            oom.flavor = OomFlavor::Plain;
        else
            throw IoError(path.string() + ": unknown flavor '" + flavor + "'");
        for (int x = 0; x < k; ++x) {
            const auto& lines = need_section("xi." + std::to_string(x));
            if (static_cast<int>(lines.size()) != m)
                throw IoError(path.string() + ": [xi." + std::to_string(x) + "] needs m rows");
            Matrix xi(m, m);
            for (int r = 0; r < m; ++r) {
                Vector row = parse_vector(lines[static_cast<std::size_t>(r)], "xi row");
                if (row.size() != m) throw IoError(path.string() + ": xi row length != m");
                xi.row(r) = row.transpose();
            }
            oom.xi.push_back(std::move(xi));
        }
        model.oom = std::move(oom);
    } else if (kind == "binless") {
        const int d = static_cast<int>(parse_long(need_key("d"), "header d"));
        const long n = parse_long(need_key("n"), "header n");
        const auto& lines = need_section("factors");
        if (static_cast<long>(lines.size()) != n)
            throw IoError(path.string() + ": [factors] row count != n");
        BinlessOom b;
        b.omega_eq = omega.transpose();
        b.sigma = sigma;
        b.sample_points.resize(n, d);
        b.left_factors.resize(n, m);
        b.right_factors.resize(n, m);
        for (long r = 0; r < n; ++r) {
            auto parts = split(lines[static_cast<std::size_t>(r)], '|');
            if (parts.size() != 3)
                throw IoError(path.string() + ": factors line needs 'z | left | right'");
            auto zs = split(strip(parts[0]), ',');
            if (static_cast<int>(zs.size()) != d)
                throw IoError(path.string() + ": factors sample-point arity != d");
            for (int j = 0; j < d; ++j)
                b.sample_points(r, j) = parse_real(strip(zs[static_cast<std::size_t>(j)]), "sample point");
            Vector left = parse_vector(strip(parts[1]), "left factor");
            Vector right = parse_vector(strip(parts[2]), "right factor");
            if (left.size() != m || right.size() != m)
                throw IoError(path.string() + ": factor length != m");
            b.left_factors.row(r) = left.transpose();
            b.right_factors.row(r) = right.transpose();
        }
        model.binless = std::move(b);
    } else {
        throw IoError(path.string() + ": unknown model kind '" + kind + "'");
    }

    const auto* bins = find_section("bins");
    if (bins) {
        std::vector<std::vector<double>> edges;
        for (const auto& line : *bins) {
            Vector v = parse_vector(line, "bin boundaries");
            edges.emplace_back(v.data(), v.data() + v.size());
        }
        model.bins = BinSpec(std::move(edges));
    }

    const auto* fm = find_section("featuremap");
    if (fm) {
        std::map<std::string, std::string> kv;
        std::map<int, Vector> centers;
        for (const auto& line : *fm) {
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) throw IoError(path.string() + ": featuremap line without '='");
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            if (key.rfind("center.", 0) == 0) {
                centers[static_cast<int>(parse_long(key.substr(7), "center index"))] =
                    parse_vector(value, "center");
            } else {
                kv[key] = value;
            }
        }
        const std::string type = kv.count("type") ? kv["type"] : "none";
        if (type == "indicator") {
            model.indicator_map = DiscreteIndicatorMap(
                static_cast<int>(parse_long(kv.at("K"), "featuremap K")),
                static_cast<int>(parse_long(kv.at("L"), "featuremap L")));
        } else if (type == "gaussian") {
            const int L = static_cast<int>(parse_long(kv.at("L"), "featuremap L"));
            const int d = static_cast<int>(parse_long(kv.at("d"), "featuremap d"));
            const int D = static_cast<int>(parse_long(kv.at("D"), "featuremap D"));
            const auto seed = static_cast<std::uint64_t>(parse_long(kv.at("seed"), "featuremap seed"));
            Vector bws = parse_vector(kv.at("bandwidths"), "bandwidths");
            if (bws.size() != D) throw IoError(path.string() + ": bandwidths length != D");
            Matrix c(D, L * d);
            for (int j = 0; j < D; ++j) {
                auto it = centers.find(j);
                if (it == centers.end() || it->second.size() != static_cast<Eigen::Index>(L) * d)
                    throw IoError(path.string() + ": bad or missing center." + std::to_string(j));
                c.row(j) = it->second.transpose();
            }
            model.gaussian_map = GaussianRandomMap(std::move(c), std::move(bws), L, d, seed);
        } else if (type != "none") {
            throw IoError(path.string() + ": unknown featuremap type '" + type + "'");
        }
    }
    return model;
}

void write_results_csv(const ResultsTable& table, const fs::path& path) {
    std::ofstream out = open_out(path);
    out << "T,estimator,repeat,value,error\n";
    for (const CellResult& c : table.cells) {
        out << c.T << ',' << estimator_name(c.estimator) << ',' << c.repeat << ',';
        if (c.ok)
            out << format_real(c.value) << ',' << format_real(c.error);
        else
            out << ",";  // missing cell
        out << '\n';
    }
}

void write_summary_csv(const ResultsTable& table, const fs::path& path) {
    std::ofstream out = open_out(path);
    out << "T,estimator,mean_error,std_error\n";
    for (const SummaryRow& r : table.summarize())
        out << r.T << ',' << estimator_name(r.estimator) << ',' << format_real(r.mean_error) << ','
            << format_real(r.std_error) << '\n';
}

void write_histogram_csv(const std::vector<double>& edges, const Vector& weights,
                         const fs::path& path) {
    if (static_cast<long>(edges.size()) != weights.size() + 1)
        throw InvalidInputError("write_histogram_csv: edges/weights mismatch");
    std::ofstream out = open_out(path);
    out << "bin_left,bin_right,weight\n";
    for (Eigen::Index b = 0; b < weights.size(); ++b)
        out << format_real(edges[static_cast<std::size_t>(b)]) << ','
            << format_real(edges[static_cast<std::size_t>(b) + 1]) << ','
            << format_real(weights(b)) << '\n';
}

} // namespace oomcraft
