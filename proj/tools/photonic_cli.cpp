#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <photonic/interference.hpp>
#include <photonic/io.hpp>
#include <photonic/matfunc.hpp>
#include <photonic/mesh.hpp>
#include <photonic/reconstruct.hpp>

using namespace photonic;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool points = false;
    std::string grid;

    // matfun
    std::string matrix;
    std::string function = "per";
    std::string partition;
    std::string inputs;
    std::string outputs;

    // mesh
    std::string mesh;
    std::string visibilities_out;
    double sigma = 0.02;

    // fitdip
    std::string scan;
};

struct Config {
    json doc = json::object();
    fs::path base = fs::current_path();

    bool has(const std::string& key) const { return doc.contains(key); }

    const json& at(const std::string& key) const {
        if (!doc.contains(key)) throw input_error("config is missing '" + key + "'");
        return doc.at(key);
    }

    fs::path path(const std::string& key) const {
        const auto& v = at(key);
        if (!v.is_string()) throw input_error("config field '" + key + "' must be a path");
        const fs::path p(v.get<std::string>());
        return p.is_absolute() ? p : base / p;
    }

    fs::path resolve(const std::string& p) const {
        const fs::path q(p);
        return q.is_absolute() ? q : base / q;
    }
};

Config load_config(const std::string& file) {
    Config c;
    if (file.empty()) return c;
    c.doc = io::read_json(file);
    if (!c.doc.is_object()) throw input_error(file + ": config must be a JSON object");
    c.base = fs::absolute(fs::path(file)).parent_path();
    return c;
}

template <class T>
T get(const Config& c, const std::string& key) {
    return io::json_field("config field '" + key + "'", [&] { return c.at(key).get<T>(); });
}

template <class T>
T get_or(const Config& c, const std::string& key, T fallback) {
    return c.has(key) ? get<T>(c, key) : fallback;
}

std::vector<int> parse_port_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& f : io::split_csv(text)) out.push_back(io::parse_int(f, "port list"));
    return out;
}

std::vector<int> ports(const Config& c, const std::string& key) {
    const auto& v = c.at(key);
    if (v.is_string()) {
        std::vector<int> out;
        for (char ch : v.get<std::string>()) {
            if (ch < '1' || ch > '9') throw input_error("config field '" + key + "' must list port digits");
            out.push_back(ch - '0');
        }
        return out;
    }
    return get<std::vector<int>>(c, key);
}

cmatrix network(const Config& c) {
    const bool u = c.has("unitary");
    const bool m = c.has("mesh");
    if (u == m) throw input_error("config needs exactly one of 'unitary' or 'mesh'");
    if (u) {
        const cmatrix U = io::read_matrix(c.path("unitary"));
        if (U.rows() != U.cols()) throw shape_error("network matrix must be square");
        return U;
    }
    return mesh_to_unitary(io::read_mesh(c.path("mesh")));
}

std::vector<GaussianPhoton> photons(const Config& c) {
    if (!c.has("photons")) throw input_error("config is missing photon spectra ('photons')");
    const auto& list = c.at("photons");
    if (!list.is_array() || list.empty()) throw input_error("'photons' must be a non-empty list");
    std::vector<GaussianPhoton> out;
    for (std::size_t k = 0; k < list.size(); ++k)
        out.push_back(io::photon_from_json(list[k], "photon " + std::to_string(k + 1)));
    return out;
}

std::string percent(double x) { return io::format_fixed(100.0 * x, 2); }

std::string port_label(const std::vector<int>& p) {
    std::string s;
    for (int x : p) s += std::to_string(x);
    return s;
}

// The result is emitted only after every computation succeeded.
void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
    } else {
        io::write_text(o.out, text);
    }
}

GridSpec grid_spec(const Config& c, const std::string& flag) {
    GridSpec g;
    if (c.has("grid")) {
        const auto& j = c.at("grid");
        io::json_field("config field 'grid'", [&] {
            if (j.contains("dtau1")) {
                g.dtau1_min = j.at("dtau1").at(0).get<double>();
                g.dtau1_max = j.at("dtau1").at(1).get<double>();
            }
            if (j.contains("dtau2")) {
                g.dtau2_min = j.at("dtau2").at(0).get<double>();
                g.dtau2_max = j.at("dtau2").at(1).get<double>();
            }
            if (j.contains("width")) g.width = j.at("width").get<int>();
            if (j.contains("height")) g.height = j.at("height").get<int>();
            return 0;
        });
    }
    if (!flag.empty()) {
        const auto x = flag.find_first_of("xX");
        if (x == std::string::npos) throw input_error("--grid expects WxH, got '" + flag + "'");
        g.width = io::parse_int(flag.substr(0, x), "--grid width");
        g.height = io::parse_int(flag.substr(x + 1), "--grid height");
    }
    if (g.width < 1 || g.height < 1) throw input_error("grid dimensions must be positive");
    return g;
}

// ---------------------------------------------------------------------------

int cmd_matfun(const Options& o) {
    const Config c = load_config(o.config);
    cmatrix M;
    if (!o.matrix.empty()) {
        M = io::read_matrix(o.matrix);
    } else if (c.has("matrix")) {
        M = c.at("matrix").is_string() ? io::read_matrix(c.path("matrix"))
                                       : io::unitary_from_json(c.at("matrix"), "config matrix");
    } else if (c.has("unitary") || c.has("mesh")) {
        M = network(c);
    } else {
        throw input_error("matfun needs a matrix (--matrix or config 'matrix')");
    }
    std::string fn = o.function;
    if (c.has("function") && o.function == "per") fn = get<std::string>(c, "function");
    std::string part = !o.partition.empty() ? o.partition : get_or<std::string>(c, "partition", "");
    std::vector<int> in = !o.inputs.empty() ? parse_port_list(o.inputs) : (c.has("inputs") ? ports(c, "inputs") : std::vector<int>{});
    std::vector<int> out = !o.outputs.empty() ? parse_port_list(o.outputs) : (c.has("outputs") ? ports(c, "outputs") : std::vector<int>{});
    if (!in.empty() || !out.empty()) {
        if (M.rows() != M.cols()) throw shape_error("port selection needs a square network matrix");
        M = submatrix(M, PortSelection{static_cast<int>(M.rows()), in, out});
    }
    complex value;
    std::string label = fn;
    if (fn == "per") {
        value = permanent(M);
    } else if (fn == "det") {
        value = determinant(M);
    } else if (fn == "imm") {
        if (part.empty()) throw input_error("imm needs --partition");
        const Partition lambda = Partition::parse(part);
        value = immanant(lambda, M);
        label = "imm" + lambda.str();
    } else {
        throw input_error("unknown function '" + fn + "' (expected per, det or imm)");
    }
    emit(o, label + " = " + io::format_complex(value, 12) + "\n");
    return 0;
}

int cmd_landscape(const Options& o) {
    const Config c = load_config(o.config);
    const cmatrix U = network(c);
    const auto ph = photons(c);
    if (ph.size() != 3) throw dimension_error("landscape needs exactly three photons");
    const PortSelection sel{static_cast<int>(U.rows()), ports(c, "inputs"), ports(c, "outputs")};
    sel.validate();
    std::vector<std::pair<double, double>> pts;
    std::vector<std::string> names;
    if (o.points) {
        const auto& list = c.at("points");
        if (!list.is_array() || list.empty()) throw input_error("'points' must be a non-empty list");
        io::json_field("config field 'points'", [&] {
            for (std::size_t k = 0; k < list.size(); ++k) {
                const auto& p = list[k];
                names.push_back(p.contains("name") ? p.at("name").get<std::string>() : "P" + std::to_string(k + 1));
                pts.emplace_back(p.at("dtau1").get<double>(), p.at("dtau2").get<double>());
            }
            return 0;
        });
    } else {
        pts = grid_spec(c, o.grid).points();
    }
    const Landscape L = landscape(U, sel, ph, pts);

    std::string csv = o.points ? "name,dtau1_fs,dtau2_fs,probability,F_per,F_det,F_imm\n" : "dtau1_fs,dtau2_fs,probability,F_per,F_det,F_imm\n";
    std::string table = "point  dtau1_fs  dtau2_fs  P(%)  F_per(%)  F_det(%)  F_imm(%)\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& f = L.fractions[k];
        if (o.points) csv += names[k] + ",";
        csv += io::format_double(pts[k].first) + "," + io::format_double(pts[k].second) + "," +
               io::format_double(L.probability[k]) + "," + io::format_double(f.per) + "," + io::format_double(f.det) + "," +
               io::format_double(f.imm) + "\n";
        if (o.points)
            table += names[k] + "  " + io::format_fixed(pts[k].first, 0) + "  " + io::format_fixed(pts[k].second, 0) + "  " +
                     percent(L.probability[k]) + "  " + percent(f.per) + "  " + percent(f.det) + "  " + percent(f.imm) + "\n";
    }
    if (o.points) {
        if (!o.out.empty()) io::write_text(o.out, csv);
        std::cout << "In" << port_label(sel.inputs) << " -> Out" << port_label(sel.outputs) << "\n" << table;
    } else {
        emit(o, csv);
    }
    return 0;
}

int cmd_distribution(const Options& o) {
    const Config c = load_config(o.config);
    const cmatrix U = network(c);
    const auto ph = photons(c);
    const auto in = ports(c, "inputs");
    if (in.size() != ph.size()) throw dimension_error("one photon per input port is required");
    if (static_cast<int>(in.size()) > U.rows()) throw input_error("more photons than modes");
    PortSelection{static_cast<int>(U.rows()), in, in}.validate();
    std::vector<double> deltas = get_or<std::vector<double>>(c, "delays", std::vector<double>(ph.size() - 1, 0.0));
    const Distribution D = output_distribution(U, in, ph, deltas);

    std::string csv = "outputs,p_total,p_per,p_imm,p_det\n";
    std::ostringstream table;
    table << "In" << port_label(in) << "  F_per " << percent(D.fractions.per) << "%  F_imm " << percent(D.fractions.imm)
          << "%  F_det " << percent(D.fractions.det) << "%\n";
    table << "outputs  theo(%)  per(%)  imm(%)  det(%)\n";
    for (const auto& e : D.entries) {
        csv += port_label(e.outputs) + "," + io::format_double(e.p_total) + "," + io::format_double(e.p_per) + "," +
               io::format_double(e.p_imm) + "," + io::format_double(e.p_det) + "\n";
        table << port_label(e.outputs) << "  " << percent(e.p_total) << "  " << percent(e.p_per) << "  " << percent(e.p_imm)
              << "  " << percent(e.p_det) << "\n";
    }
    if (!o.out.empty()) io::write_text(o.out, csv);
    std::cout << table.str();
    return 0;
}

int cmd_ratematrix(const Options& o) {
    const Config c = load_config(o.config);
    const auto ph = photons(c);
    std::vector<double> deltas = get_or<std::vector<double>>(c, "delays", std::vector<double>(ph.size() - 1, 0.0));
    const double overlap = get_or<double>(c, "mode_overlap", 1.0);
    const RateMatrix R = rate_matrix(ph, deltas, overlap);
    const Fractions f = fractions(R);
    json blocks = json::array();
    for (const auto& b : R.blocks)
        blocks.push_back({{"partition", b.partition.str()}, {"dimension", b.dim}, {"offset", b.offset}, {"size", b.size}});
    json doc = {{"n", R.n},
                {"blocks", blocks},
                {"fractions", {{"per", f.per}, {"imm", f.imm}, {"det", f.det}}},
                {"matrix", io::unitary_to_json(R.matrix)}};
    emit(o, doc.dump(1) + "\n");
    if (!o.out.empty()) {
        std::cout << "n = " << R.n << ", " << R.matrix.rows() << "x" << R.matrix.cols() << " blocks:";
        for (const auto& b : R.blocks) std::cout << " " << b.size;
        std::cout << "\nF_per " << percent(f.per) << "%  F_imm " << percent(f.imm) << "%  F_det " << percent(f.det) << "%\n";
    }
    return 0;
}

int cmd_mesh(const Options& o) {
    const Config c = load_config(o.config);
    fs::path mesh_path;
    if (!o.mesh.empty()) {
        mesh_path = o.mesh;
    } else {
        mesh_path = c.path("mesh");
    }
    const InterferometerMesh mesh = io::read_mesh(mesh_path);
    const cmatrix U = mesh_to_unitary(mesh);
    const double sigma = get_or<double>(c, "sigma", o.sigma);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw input_error("sigma must be positive");
    std::string vis;
    if (!o.visibilities_out.empty()) vis = io::visibilities_to_csv(predicted_visibilities(U, sigma));
    emit(o, io::unitary_to_json(U).dump(1) + "\n");
    if (!o.visibilities_out.empty()) io::write_text(o.visibilities_out, vis);
    return 0;
}

json fit_to_json(const DipFit& f) {
    const auto& p = f.parameters;
    return {{"y0", p.y0},
            {"amplitude", p.amplitude},
            {"t_c_fs", p.t_c},
            {"drift_slope", p.drift_slope},
            {"std_errors", {f.std_errors[0], f.std_errors[1], f.std_errors[2], f.std_errors[3]}},
            {"visibility", f.visibility},
            {"visibility_error", f.visibility_error},
            {"chi2_reduced", f.chi2_reduced}};
}

std::vector<fs::path> scan_paths(const Config& c) {
    std::vector<fs::path> out;
    if (c.has("scan_dir")) {
        for (const auto& e : fs::directory_iterator(c.path("scan_dir")))
            if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(e.path());
        std::sort(out.begin(), out.end());
        if (out.empty()) throw insufficient_data_error("no scan files in " + c.path("scan_dir").string());
    }
    if (c.has("scans"))
        for (const auto& s : get<std::vector<std::string>>(c, "scans")) out.push_back(c.resolve(s));
    return out;
}

int cmd_fitdip(const Options& o) {
    const Config c = load_config(o.config);
    std::vector<fs::path> paths;
    if (!o.scan.empty()) {
        paths.push_back(o.scan);
    } else {
        paths = scan_paths(c);
    }
    if (paths.empty()) throw input_error("fitdip needs --scan or config 'scans'");
    std::vector<VisibilityScan> scans;
    for (const auto& p : paths) scans.push_back(io::read_scan(p));
    json fits = json::array();
    for (std::size_t k = 0; k < scans.size(); ++k) {
        json j = fit_to_json(fit_dip(scans[k]));
        j["file"] = paths[k].filename().string();
        j["pairing"] = {scans[k].i, scans[k].j, scans[k].k, scans[k].l};
        fits.push_back(j);
    }
    emit(o, (fits.size() == 1 ? fits[0] : fits).dump(1) + "\n");
    return 0;
}

int cmd_reconstruct(const Options& o) {
    const Config c = load_config(o.config);
    if (o.config.empty()) throw input_error("reconstruct needs --config");
    const InterferometerMesh templ = io::read_mesh(c.path("mesh"));
    std::vector<VisibilityDatum> data;
    std::vector<VisibilityScan> scans;
    json fits = json::array();
    if (c.has("visibilities")) data = io::read_visibilities(c.path("visibilities"));
    for (const auto& p : scan_paths(c)) scans.push_back(io::read_scan(p));
    if (!c.has("visibilities") && scans.empty()) throw input_error("reconstruct needs 'visibilities' or scans");
    for (const auto& s : scans) {
        const DipFit f = fit_dip(s);
        data.push_back({s.i, s.j, s.k, s.l, f.visibility, f.visibility_error});
        fits.push_back(fit_to_json(f));
    }
    ReconstructionProblem problem;
    problem.mesh = templ;
    problem.data = data;
    problem.gamma = get_or<double>(c, "gamma", default_gamma);
    problem.starts = get_or<int>(c, "starts", 32);
    problem.seed = o.seed ? *o.seed : get_or<std::uint64_t>(c, "seed", 0);
    const MeshFit fit = optimize_mesh(problem);

    json residuals = json::array();
    for (std::size_t q = 0; q < fit.report.used.size(); ++q) {
        const auto& d = fit.report.used[q];
        residuals.push_back({{"pairing", {d.i, d.j, d.k, d.l}},
                             {"V_exp", d.value},
                             {"V_th", fit.report.predicted[q]},
                             {"sigma", d.sigma},
                             {"residual", fit.report.residuals[q]}});
    }
    std::vector<double> params(fit.report.parameters.data(), fit.report.parameters.data() + fit.report.parameters.size());
    json report = {{"parameters", params},
                   {"V_opt", fit.report.v_opt},
                   {"gamma", problem.gamma},
                   {"visibilities", fit.report.used.size()},
                   {"free_parameters", templ.parameter_count()},
                   {"best_start", fit.report.best_start},
                   {"residuals", residuals},
                   {"mesh", io::mesh_to_json(fit.mesh)},
                   {"unitary", io::unitary_to_json(fit.unitary)}};
    if (!scans.empty()) {
        report["dip_fits"] = fits;
        report["chi2_reduced"] = chi2_reduced(scans, fit.unitary, get_or<int>(c, "unitary_parameters", 20));
    }
    emit(o, report.dump(1) + "\n");
    if (!o.out.empty())
        std::cout << "V_opt = " << io::format_significant(fit.report.v_opt, 6) << " from " << fit.report.used.size()
                  << " visibilities, " << templ.parameter_count() << " parameters\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photonic: multi-photon interference and interferometer reconstruction"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* s) {
        s->add_option("--config", o.config, "JSON configuration file");
        s->add_option("--out", o.out, "output file");
    };

    auto* matfun = app.add_subcommand("matfun", "permanent, determinant or immanant of a matrix");
    common(matfun);
    matfun->add_option("--matrix", o.matrix, "matrix JSON file");
    matfun->add_option("--function", o.function, "per, det or imm");
    matfun->add_option("--partition", o.partition, "partition for imm, e.g. 2,1");
    matfun->add_option("--inputs", o.inputs, "input ports selecting columns, e.g. 1,2,4");
    matfun->add_option("--outputs", o.outputs, "output ports selecting rows");

    auto* land = app.add_subcommand("landscape", "three-photon coincidence landscape");
    common(land);
    land->add_flag("--points", o.points, "evaluate the configured delay points");
    land->add_option("--grid", o.grid, "grid size WxH");

    auto* dist = app.add_subcommand("distribution", "normalized output distribution");
    common(dist);

    auto* rate = app.add_subcommand("ratematrix", "symmetry-adapted rate matrix");
    common(rate);

    auto* mesh = app.add_subcommand("mesh", "compose a mesh into its unitary");
    common(mesh);
    mesh->add_option("--mesh", o.mesh, "mesh JSON file");
    mesh->add_option("--visibilities", o.visibilities_out, "also write the predicted non-zero visibilities CSV");
    mesh->add_option("--sigma", o.sigma, "sigma column of the visibilities CSV");

    auto* rec = app.add_subcommand("reconstruct", "fit mesh parameters to visibilities");
    common(rec);
    rec->add_option("--seed", o.seed, "multi-start seed");

    auto* fit = app.add_subcommand("fitdip", "fit the dip model to delay scans");
    common(fit);
    fit->add_option("--scan", o.scan, "scan CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*matfun) return cmd_matfun(o);
        if (*land) return cmd_landscape(o);
        if (*dist) return cmd_distribution(o);
        if (*rate) return cmd_ratematrix(o);
        if (*mesh) return cmd_mesh(o);
        if (*rec) return cmd_reconstruct(o);
        if (*fit) return cmd_fitdip(o);
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const insufficient_data_error& e) {
        std::cerr << "insufficient data: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
