#include "fermirot/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fermirot/downfold.h"
#include "fermirot/dynamics.h"
#include "fermirot/fcidump.h"
#include "fermirot/json_io.h"
#include "fermirot/models.h"
#include "fermirot/rotations.h"
#include "fermirot/states.h"

namespace fermirot {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& name) {
    ConfigFile cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(name + ":" + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw Error(name + ":" + std::to_string(line_no) + ": empty section name");
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(name + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw Error(name + ":" + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw Error(name + ":" + std::to_string(line_no) + ": key outside any [section]");
        cfg.sections_[section][key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
        throw Error(name_ + ": missing key '" + key + "' in section [" + section + "]");
    return s->second.at(key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error(name_ + ": value of '" + key + "' in [" + section + "] is not a number: '" + v +
                    "'");
    }
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error(name_ + ": value of '" + key + "' in [" + section + "] is not an integer: '" +
                    v + "'");
    }
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              long long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key))
        return fallback;
    std::string v = get_string(section, key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw Error(name_ + ": value of '" + key + "' in [" + section + "] is not a boolean: '" + v +
                "'");
}

std::vector<OrbitalIndex> ConfigFile::get_index_list(const std::string& section,
                                                     const std::string& key) const {
    std::vector<OrbitalIndex> out;
    std::istringstream ss(get_string(section, key));
    long long v = 0;
    while (ss >> v) {
        if (v < 0 || v >= static_cast<long long>(max_orbitals))
            throw Error(name_ + ": index " + std::to_string(v) + " in '" + key + "' is out of range");
        out.push_back(static_cast<OrbitalIndex>(v));
    }
    if (!ss.eof())
        throw Error(name_ + ": value of '" + key + "' in [" + section + "] is not an index list");
    return out;
}

std::vector<std::uint64_t> ConfigFile::get_uint64_list(const std::string& section,
                                                       const std::string& key) const {
    std::vector<std::uint64_t> out;
    std::istringstream ss(get_string(section, key));
    std::uint64_t v = 0;
    while (ss >> v)
        out.push_back(v);
    if (!ss.eof())
        throw Error(name_ + ": value of '" + key + "' in [" + section + "] is not an integer list");
    return out;
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

namespace {

std::filesystem::path prepare_out_dir(const CliOptions& options) {
    std::filesystem::path dir(options.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_artifact(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write '" + path.string() + "'");
    return out;
}

struct ModelInput {
    OperatorSum h;
    int num_spinorbitals = 0;
};

int spinorbital_span(const OperatorSum& x) {
    int n = 0;
    for (const auto& [p, c] : x.terms()) {
        const std::uint64_t sup = p.support();
        if (sup != 0)
            n = std::max(n, 64 - std::countl_zero(sup));
    }
    return n;
}

ModelInput load_model(const ConfigFile& cfg, const std::string& section) {
    const std::string model = cfg.get_string(section, "model", "hubbard");
    ModelInput input;
    if (model == "hubbard") {
        HubbardSpec spec;
        spec.sites = static_cast<unsigned>(cfg.get_int(section, "sites"));
        spec.hopping = cfg.get_double(section, "hopping", 1.0);
        spec.onsite = cfg.get_double(section, "coulomb", 0.0);
        input.h = hubbard_chain(spec);
        input.num_spinorbitals = static_cast<int>(2 * spec.sites);
    } else if (model == "fcidump") {
        const std::string path = cfg.get_string(section, "path");
        auto [ints, h] = load_fcidump(path);
        for (const std::string& w : ints.warnings)
            std::fprintf(stderr, "warning: %s\n", w.c_str());
        input.h = std::move(h);
        input.num_spinorbitals = 2 * ints.norb;
    } else if (model == "operator_json") {
        input.h = operator_sum_from_json(load_json_file(cfg.get_string(section, "path")));
        input.num_spinorbitals = spinorbital_span(input.h);
    } else {
        throw Error("unknown model '" + model + "' (expected hubbard, fcidump, or operator_json)");
    }
    if (cfg.has(section, "num_spinorbitals"))
        input.num_spinorbitals = static_cast<int>(cfg.get_int(section, "num_spinorbitals"));
    return input;
}

OperatorProduct product_from_config(const ConfigFile& cfg, const std::string& section,
                                    const std::string& prefix) {
    std::uint64_t cre = 0, ann = 0;
    for (OrbitalIndex p : cfg.get_index_list(section, prefix + "_creators")) {
        if (cre & (1ull << p))
            throw Error("repeated index in " + prefix + "_creators");
        cre |= 1ull << p;
    }
    for (OrbitalIndex p : cfg.get_index_list(section, prefix + "_annihilators")) {
        if (ann & (1ull << p))
            throw Error("repeated index in " + prefix + "_annihilators");
        ann |= 1ull << p;
    }
    return {cre, ann};
}

const char* class_name(RotationClass cls) {
    switch (cls) {
    case RotationClass::trivial:
        return "trivial";
    case RotationClass::class1:
        return "1";
    default:
        return "4";
    }
}

void write_svg_line_plot(const std::filesystem::path& path, const std::vector<double>& xs,
                         const std::vector<double>& ys, const std::string& title) {
    if (xs.empty() || xs.size() != ys.size())
        return;
    const double x0 = xs.front(), x1 = xs.back();
    double y0 = *std::min_element(ys.begin(), ys.end());
    double y1 = *std::max_element(ys.begin(), ys.end());
    if (y1 - y0 < 1e-12) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double w = 800, h = 400, ml = 60, mr = 20, mt = 30, mb = 40;
    const auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
    const auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };
    std::ofstream out = open_artifact(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 5 << "\" y=\"" << py(y0) << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_number(y0) << "</text>\n";
    out << "<text x=\"" << ml - 5 << "\" y=\"" << py(y1) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(y1) << "</text>\n";
    out << "<text x=\"" << px(x1) << "\" y=\"" << h - mb + 15
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_number(x1) << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << px(xs[i]) << ',' << py(ys[i]) << ' ';
    out << "\"/>\n</svg>\n";
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const StructuralViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

} // namespace

int cmd_transform(const CliOptions& options) {
    return guarded([&]() {
        const ConfigFile cfg = ConfigFile::parse_file(options.config_path);
        const auto dir = prepare_out_dir(options);
        const std::string sec = "transform";

        OperatorProduct o;
        if (cfg.has(sec, "o_json")) {
            const OperatorSum sum = operator_sum_from_json(load_json_file(cfg.get_string(sec, "o_json")));
            if (sum.size() != 1)
                throw Error("o_json must contain exactly one term");
            o = sum.terms().front().first;
        } else {
            o = product_from_config(cfg, sec, "o");
        }
        Generator g;
        g.t = product_from_config(cfg, sec, "t");
        const std::string kind = cfg.get_string(sec, "kind", "anti");
        if (kind == "anti" || kind == "anti_hermitian")
            g.kind = RotationKind::anti_hermitian;
        else if (kind == "hermitian")
            g.kind = RotationKind::hermitian;
        else
            throw Error("kind must be 'anti' or 'hermitian'");
        g.theta = cfg.get_double(sec, "theta", 0.0);

        const ClassifiedCommutators cc = classify_commutators(o, g);
        const OperatorSum transformed = rotate_product(o, g);

        nlohmann::json j;
        j["operator"] = operator_sum_to_json(OperatorSum(o));
        j["generator"] = operator_sum_to_json(build_generator_sum(g));
        j["kind"] = (g.kind == RotationKind::anti_hermitian) ? "anti_hermitian" : "hermitian";
        j["theta"] = g.theta;
        j["class"] = class_name(cc.cls);
        j["commutator"] = operator_sum_to_json(cc.c);
        j["double_commutator"] = operator_sum_to_json(cc.d);
        j["transformed"] = operator_sum_to_json(transformed);
        save_json(j, (dir / "transform.json").string());
    });
}

int cmd_inspect(const CliOptions& options) {
    return guarded([&]() {
        const ConfigFile cfg = ConfigFile::parse_file(options.config_path);
        const auto dir = prepare_out_dir(options);
        const std::string format = cfg.get_string("inspect", "format", "json");
        OperatorSum x;
        if (format == "json") {
            x = operator_sum_from_json(load_json_file(cfg.get_string("inspect", "input")));
        } else if (format == "fcidump") {
            auto [ints, h] = load_fcidump(cfg.get_string("inspect", "input"));
            for (const std::string& w : ints.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            x = std::move(h);
        } else {
            throw Error("inspect format must be 'json' or 'fcidump'");
        }

        nlohmann::json j;
        j["term_count"] = x.size();
        j["euclidean_norm"] = euclidean_norm(x);
        j["hermiticity_residual"] = hermiticity_residual(x);
        nlohmann::json blocks = nlohmann::json::array();
        const RankMagnitudeMatrix m = rank_magnitude_matrix(x);
        for (int n = 0; n < m.dimension(); ++n) {
            for (int k = 0; k < m.dimension(); ++k) {
                if (m.norms[n][k] != 0.0)
                    blocks.push_back({{"creators", n}, {"annihilators", k}, {"norm", m.norms[n][k]}});
            }
        }
        j["rank_blocks"] = blocks;
        nlohmann::json ranks = nlohmann::json::object();
        for (const auto& [r2, part] : rank_partition(x)) {
            char key[32];
            if (r2 % 2 == 0)
                std::snprintf(key, sizeof(key), "%d", r2 / 2);
            else
                std::snprintf(key, sizeof(key), "%d/2", r2);
            ranks[key] = euclidean_norm(part);
        }
        j["rank_norms"] = ranks;
        save_json(j, (dir / "inspect.json").string());
    });
}

int cmd_downfold(const CliOptions& options) {
    return guarded([&]() {
        const ConfigFile cfg = ConfigFile::parse_file(options.config_path);
        const auto dir = prepare_out_dir(options);
        const std::string sec = "downfold";
        const ModelInput input = load_model(cfg, sec);

        DownfoldConfig dc;
        dc.num_spinorbitals = input.num_spinorbitals;
        dc.active = cfg.get_index_list(sec, "active");
        dc.external = cfg.get_index_list(sec, "external");
        for (std::uint64_t bits : cfg.get_uint64_list(sec, "active_determinants"))
            dc.active_determinants.push_back({bits});
        dc.gradient_threshold = cfg.get_double(sec, "gradient_threshold", 1.0e-6);
        dc.energy_threshold = cfg.get_double(sec, "energy_threshold", 1.0e-9);
        dc.max_operators = static_cast<std::size_t>(cfg.get_int(sec, "max_operators", 0));
        const std::string sweep_mode = cfg.get_string(sec, "sweep", "none");
        if (sweep_mode == "none")
            dc.sweep = SweepMode::none;
        else if (sweep_mode == "one-pass")
            dc.sweep = SweepMode::one_pass;
        else
            throw Error("sweep must be 'none' or 'one-pass'");
        dc.sweep_to_convergence = cfg.get_bool(sec, "sweep_to_convergence", false);
        dc.optimizer_tol = cfg.get_double(sec, "optimizer_tolerance", 1.0e-10);
        dc.compute_oracle = cfg.get_bool(sec, "oracle", true);
        dc.threads = options.threads;

        const DownfoldReport report = run_adaptive(input.h, dc);

        {
            std::ofstream out = open_artifact(dir / "downfold_iterations.csv");
            out << "iteration,selected,theta,gradient,energy,energy_error\n";
            for (const IterationRecord& r : report.iterations) {
                out << r.iteration << ',' << (r.selected ? r.selected->str() : "-") << ','
                    << format_number(r.theta) << ',' << format_number(r.gradient) << ','
                    << format_number(r.energy) << ','
                    << (r.energy_error ? format_number(*r.energy_error) : "") << '\n';
            }
        }
        {
            std::ofstream out = open_artifact(dir / "rank_magnitude.csv");
            const int dim = report.rank_matrix.dimension();
            out << "creators";
            for (int m = 0; m < dim; ++m)
                out << ",ann_" << m;
            out << '\n';
            for (int n = 0; n < dim; ++n) {
                out << n;
                for (int m = 0; m < dim; ++m)
                    out << ',' << format_number(report.rank_matrix.norms[n][m]);
                out << '\n';
            }
        }
        save_json(operator_sum_to_json(report.hbar), (dir / "hbar.json").string());

        nlohmann::json summary;
        summary["seed"] = options.seed;
        summary["termination"] = report.termination;
        summary["operators"] = report.sequence.size();
        summary["final_energy"] = report.final_energy;
        if (report.exact_energy) {
            summary["exact_energy"] = *report.exact_energy;
            summary["energy_error"] = report.final_energy - *report.exact_energy;
        }
        summary["hbar_terms"] = report.hbar.size();
        summary["hbar_hermiticity_residual"] = hermiticity_residual(report.hbar);
        save_json(summary, (dir / "summary.json").string());
    });
}

int cmd_dynamics(const CliOptions& options) {
    return guarded([&]() {
        const ConfigFile cfg = ConfigFile::parse_file(options.config_path);
        const auto dir = prepare_out_dir(options);
        const std::string sec = "dynamics";
        const ModelInput input = load_model(cfg, sec);

        const int n_up = static_cast<int>(cfg.get_int(sec, "n_up"));
        const int n_down = static_cast<int>(cfg.get_int(sec, "n_down"));
        const auto orbital = static_cast<OrbitalIndex>(cfg.get_int(sec, "ionized_orbital", 0));
        DynamicsOptions opts;
        opts.total_time = cfg.get_double(sec, "total_time");
        opts.steps = static_cast<int>(cfg.get_int(sec, "steps"));
        opts.truncation = cfg.get_double(sec, "truncation", 0.0);
        const bool with_exact = cfg.get_bool(sec, "exact", true);
        const bool with_svg = cfg.get_bool(sec, "svg", false);

        const Basis gs_sector = Basis::particle_sector(input.num_spinorbitals, n_up, n_down);
        const auto [gs_energy, gs] = ground_state(input.h, gs_sector);
        const StateVector psi0 = sudden_ionization_state(gs, orbital);
        const OperatorSum obs(OperatorProduct{1ull << orbital, 1ull << orbital});

        const DynamicsReport report = heisenberg_evolve(obs, input.h, psi0, opts);

        std::vector<complex_t> oracle;
        double max_dev = 0.0, mean_dev = 0.0;
        if (with_exact) {
            const int up_removed = (orbital % 2 == 0) ? 1 : 0;
            const Basis ion_sector =
                Basis::particle_sector(input.num_spinorbitals, n_up - up_removed,
                                       n_down - (1 - up_removed));
            oracle = exact_heisenberg(obs, input.h, ion_sector, psi0, report.times);
            std::tie(max_dev, mean_dev) = compare_exact(report, oracle);
        }

        {
            std::ofstream out = open_artifact(dir / "dynamics_timeline.csv");
            out << (with_exact ? "t,observable,exact,deviation\n" : "t,observable\n");
            for (std::size_t i = 0; i < report.times.size(); ++i) {
                out << format_number(report.times[i]) << ','
                    << format_number(report.observable[i].real());
                if (with_exact) {
                    out << ',' << format_number(oracle[i].real()) << ','
                        << format_number(std::abs(report.observable[i] - oracle[i]));
                }
                out << '\n';
            }
        }
        {
            std::ofstream out = open_artifact(dir / "rank_norms.csv");
            out << "t,k,norm\n";
            for (const RankNormRow& row : rank_norm_timeline(report)) {
                out << format_number(row.time) << ',';
                if (row.rank2 % 2 == 0)
                    out << row.rank2 / 2;
                else
                    out << format_number(row.rank2 / 2.0);
                out << ',' << format_number(row.norm) << '\n';
            }
        }
        save_json(state_vector_to_json(psi0), (dir / "initial_state.json").string());

        nlohmann::json summary;
        summary["seed"] = options.seed;
        summary["steps"] = opts.steps;
        summary["dt"] = opts.total_time / opts.steps;
        summary["ground_energy"] = gs_energy;
        summary["final_term_count"] = report.term_counts.back();
        summary["dropped_weight"] = report.dropped_weight.back();
        summary["coefficient_norm_initial"] = report.coefficient_norm.front();
        summary["coefficient_norm_final"] = report.coefficient_norm.back();
        {
            // drift of the one-body norm across the run
            double k1_min = 0.0, k1_max = 0.0;
            bool first = true;
            for (const auto& norms : report.rank_norms) {
                const auto it = norms.find(2);
                const double v = (it == norms.end()) ? 0.0 : it->second;
                if (first) {
                    k1_min = k1_max = v;
                    first = false;
                } else {
                    k1_min = std::min(k1_min, v);
                    k1_max = std::max(k1_max, v);
                }
            }
            summary["one_body_norm_min"] = k1_min;
            summary["one_body_norm_max"] = k1_max;
        }
        if (with_exact) {
            summary["max_deviation"] = max_dev;
            summary["mean_deviation"] = mean_dev;
        }
        save_json(summary, (dir / "summary.json").string());

        if (with_svg) {
            std::vector<double> ys;
            ys.reserve(report.observable.size());
            for (const complex_t& v : report.observable)
                ys.push_back(v.real());
            write_svg_line_plot(dir / "observable.svg", report.times, ys, "observable expectation");
        }
    });
}

} // namespace fermirot
